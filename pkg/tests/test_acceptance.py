"""Release gate: twelve end-to-end checks, one printed line each.

Each check prints a single PASS/FAIL line (bypassing capture, so the
lines show up in a plain `pytest -v` run).  Exact closed forms get hard
tolerances; Monte Carlo checks pin seeds and use tolerances sized to
several standard errors, so a pass is reproducible bit for bit.  The
whole file runs in roughly twenty minutes on one core; the heavy
entries are the moment-scaling fits and the n = 32 second-moment sweep.
"""

import json
import math
import os
import time

import numpy as np
import pytest
from scipy import stats

import sle_lab as sl
from sle_lab import derive_exponents, solve_critical
from sle_lab.cli import ExperimentConfig, run

KAPPAS = (0.5, 2.0, 8 / 3, 4.0, 6.0, 8.0, 16.0)


@pytest.fixture
def verdict(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"[{label}] {'PASS' if ok else 'FAIL'} ({detail})", flush=True)
        assert ok, f"{label}: {detail}"

    return emit


def test_c01_exponent_algebra(verdict):
    t0 = time.time()
    gap_star = max(
        abs(solve_critical(1.0).alpha_star - 0.5),
        abs(solve_critical(8.0).alpha_star),
    )
    gap_root = max(
        abs(solve_critical(k).beta_plus - sl.beta_plus_closed_form(k))
        for k in KAPPAS
    )
    gap_ident = max(
        abs(c.lambda_plus * c.beta_plus + c.zeta_plus - 2.0)
        for c in (solve_critical(k) for k in KAPPAS)
    )
    ok = gap_star < 1e-9 and gap_root < 1e-9 and gap_ident < 1e-10
    verdict(
        "1 exponent algebra", ok,
        f"alpha gap {gap_star:.1e}, root gap {gap_root:.1e}, "
        f"identity gap {gap_ident:.1e}, {time.time() - t0:.1f}s",
    )


def test_c02_constant_driver_oracles(verdict):
    t0 = time.time()
    slit1 = sl.deterministic_driver("constant", 2.0, 1e-4)
    slit2 = sl.deterministic_driver("constant", 1.0, 1e-4, a=2.0)
    errs = [
        abs(sl.reverse_flow(slit1, 1j, t_end=1.0).h - 1j * math.sqrt(3.0)) / 1e-12,
        abs(sl.forward_map(slit1, 1j, 1.0).tau - 0.5) / 1e-9,
        abs(sl.trace(slit2, [1.0], y_min=1e-4).points[0] - 2j) / 1e-4,
        abs(sl.v_integral(slit1, 1.0, 1.0) - (math.sqrt(3) - math.sqrt(2))) / 1e-3,
        abs(sl.hull_stats(slit1, 0.5, resolution=256).hcap - 0.5) / 1e-4,
    ]
    ok = max(errs) < 1.0
    verdict(
        "2 constant-driver oracles", ok,
        f"worst error at {max(errs):.2g} of its tolerance, {time.time() - t0:.1f}s",
    )


def test_c03_capacity_identity(verdict):
    t0 = time.time()
    worst = 0.0
    count = 0
    for kappa in (2.0, 4.0, 6.0):
        for seed in range(7 if kappa != 6.0 else 6):
            count += 1
            path = sl.sample_brownian(kappa, 0.5, 1e-4, seed=100 + seed)
            t = 0.25 if seed % 2 == 0 else 0.5
            hs = sl.hull_stats(path, t, resolution=256)
            worst = max(worst, abs(hs.hcap - path.a * t) / (path.a * t))
    ok = count == 20 and worst < 1e-3
    verdict(
        "3 capacity identity", ok,
        f"20 drivers, worst relative error {worst:.2e}, {time.time() - t0:.0f}s",
    )


def test_c04_derivative_sandwich(verdict):
    t0 = time.time()
    rng = np.random.default_rng(0)
    viol_ratio = viol_disp = 0
    count = 0
    for kappa in (2.0, 4.0, 6.0):
        for ps in range(7 if kappa != 6.0 else 6):
            path = sl.sample_brownian(kappa, 1.0, 1e-3, seed=200 + ps)
            a = path.a
            lim = math.exp(5 * a)
            for _ in range(10):
                count += 1
                y = rng.uniform(0.1, 0.8)
                x = rng.uniform(-1.5, 1.5)
                z = complex(x, y)
                s_cap = max(1, int(min(y * y, 0.3) / path.dt))
                t_steps = rng.integers(100, path.n_steps - s_cap)
                s_steps = rng.integers(1, s_cap + 1)
                f1 = sl.reverse_flow(
                    sl.reversed_driver(path, t_steps * path.dt),
                    z - path.values[t_steps],
                )
                f2 = sl.reverse_flow(
                    sl.reversed_driver(path, (t_steps + s_steps) * path.dt),
                    z - path.values[t_steps + s_steps],
                )
                ratio = f2.abs_deriv / f1.abs_deriv
                if not (1 / lim <= ratio <= lim):
                    viol_ratio += 1
                p1 = f1.h + path.values[t_steps]
                p2 = f2.h + path.values[t_steps + s_steps]
                if abs(p2 - p1) > (y / 5) * (lim - 1) * f1.abs_deriv + 1e-12:
                    viol_disp += 1
    ok = count == 200 and viol_ratio == 0 and viol_disp == 0
    verdict(
        "4 derivative sandwich", ok,
        f"200 triples, {viol_ratio} ratio / {viol_disp} displacement "
        f"violations, {time.time() - t0:.0f}s",
    )


def test_c05_diffusion_identities(verdict):
    t0 = time.time()
    pars = derive_exponents(8 / 3, 1.0)
    n1 = sl.martingale_terminal(pars, 1.0, 2.5e-4, seed=11, samples=100000)
    mean = n1.mean()
    se = n1.std(ddof=1) / math.sqrt(n1.size)
    ok_mart = abs(mean - 1.0) <= 3 * se

    pvals = []
    dens_gap = 0.0
    for q in (0.5, 1.0, 2.0):
        j = sl.terminal_J(
            derive_exponents(4.0, 1.5 - q), "Pstar", 30.0, 1e-3,
            seed=31, samples=4000,
        )
        xs = np.linspace(-12, 12, 20001)
        cdf = np.cumsum(sl.invariant_density(q, xs)) * (xs[1] - xs[0])
        cdf /= cdf[-1]
        nb = 20
        edges = np.interp(np.linspace(0, 1, nb + 1)[1:-1], cdf, xs)
        edges = np.concatenate([[-np.inf], edges, [np.inf]])
        counts, _ = np.histogram(j, edges)
        expected = j.size / nb
        chi2 = ((counts - expected) ** 2 / expected).sum()
        pvals.append(float(stats.chi2.sf(chi2, nb - 1)))
        dens_gap = max(
            dens_gap, abs(sl.beta_from_density(q) - (1 - 2 * q) / (1 + 2 * q))
        )
    ok = ok_mart and min(pvals) > 0.01 and dens_gap < 1e-8
    verdict(
        "5 diffusion identities", ok,
        f"E[N_1]={mean:.4f}+-{se:.4f}, chi2 p={['%.3f' % p for p in pvals]}, "
        f"density gap {dens_gap:.1e}, {time.time() - t0:.0f}s",
    )


def test_c06_time_change_law(verdict):
    t0 = time.time()
    flow = sl.flow_derivative_samples(8 / 3, 1.0, 5000, seed=10, y=1.0, dt=2e-4)
    abs_h, _, _ = sl.surrogate_terminal(
        derive_exponents(8 / 3, 0.5), [1.0], dt=2e-4, seed=77, samples=5000
    )
    ks = stats.ks_2samp(flow, abs_h[0]).statistic
    verdict(
        "6 time-change law", ks <= 0.04,
        f"KS distance {ks:.4f} at 5000+5000 samples, {time.time() - t0:.0f}s",
    )


def test_c07_moment_scaling(verdict):
    t0 = time.time()
    gaps = []
    for kappa, r in ((8 / 3, 1.0), (2.0, 0.5)):
        m = sl.estimate_moment(
            kappa, r, (2.0, 4.0, 8.0, 16.0), 20000, dt=1e-3, seed=7
        )
        gaps.append(abs(m.slope + m.params.zeta))
    ok = max(gaps) <= 0.07
    verdict(
        "7 moment scaling", ok,
        f"slope gaps {gaps[0]:.3f} (8/3,1) and {gaps[1]:.3f} (2,1/2), "
        f"{time.time() - t0:.0f}s",
    )


def test_c08_typical_exponent(verdict):
    t0 = time.time()
    gaps = []
    for kappa in (2.0, 8.0):
        te = sl.estimate_typical_exponent(
            kappa, 1.0, (0.00625, 0.0125, 0.025, 0.05, 0.1), 4000,
            seed=5, rel_step=2e-3,
        )
        gaps.append(abs(te.slope - 4.0 / (4.0 + kappa)))
    ok = max(gaps) <= 0.05
    verdict(
        "8 typical exponent", ok,
        f"slope gaps {gaps[0]:.3f} (kappa 2) and {gaps[1]:.3f} (kappa 8), "
        f"{time.time() - t0:.0f}s",
    )


def test_c09_sigma_tail(verdict):
    t0 = time.time()
    u = np.geomspace(2.0, 20.0, 12)
    details = []
    ok = True
    for r in (1.5, 1.0):
        params = derive_exponents(8 / 3, r)
        st = sl.sigma_tail(params, 3.0, u, samples=50000, seed=13, dt=1e-3)
        bound = -2 * params.q + 0.3
        ok &= st.slope <= bound
        details.append(f"q={params.q:g}: {st.slope:.2f} <= {bound:.1f}")
    verdict(
        "9 sigma tail", ok, "; ".join(details) + f", {time.time() - t0:.0f}s"
    )


def test_c10_second_moment_statistic(verdict):
    t0 = time.time()
    env = sl.calibrate_envelope(8 / 3, 1.0, seed=3)
    ns = (8, 16, 32)
    ratios = []
    per_term = []
    for n in ns:
        yn = sl.y_n_statistic(8 / 3, 1.0, n, 500, seed=3, envelope=env)
        ratios.append(yn.ratio)
        per_term.append(yn.per_term_mean)
    spread = max(ratios) / min(ratios)
    slope = float(np.polyfit(np.log(ns), np.log(per_term), 1)[0])
    ok = spread <= 2.0 and abs(slope + 2.0) <= 0.3
    verdict(
        "10 second-moment statistic", ok,
        f"ratio spread {spread:.2f}, per-term slope {slope:.2f}, "
        f"{time.time() - t0:.0f}s",
    )


def test_c11_holder_smoke(verdict):
    t0 = time.time()
    n = 2**14 + 1
    times = np.linspace(0.0, 1.0, n)
    dt = 2.0**-15
    slit = sl.deterministic_driver("constant", 1.0, dt)
    a0 = sl.estimate_holder(sl.trace(slit, times), eps=0.0).alpha_hat
    alphas = []
    for seed in range(10):
        path = sl.sample_brownian(2.0, 1.0, dt, seed=seed)
        alphas.append(sl.estimate_holder(sl.trace(path, times), eps=0.1).alpha_hat)
    med = float(np.median(alphas))
    ok = abs(a0 - 0.5) <= 0.03 and 0.15 < med < 0.45
    verdict(
        "11 holder smoke", ok,
        f"constant driver {a0:.3f}, kappa=2 median {med:.3f} over 10 seeds, "
        f"{time.time() - t0:.0f}s",
    )


SMALL_CONFIGS = {
    "exponents": dict(kappa=2.0),
    "alpha_curve": dict(kappa_min=0.5, kappa_max=4.0, n=5),
    "trace": dict(kappa=2.0, T=0.25, dt=1e-3, n=64, seed=3),
    "moments": dict(kappa=8 / 3, r=1.0, t_grid=(2.0, 4.0), samples=100,
                    dt=0.05, seed=1),
    "typical": dict(kappa=2.0, T=1.0, y_grid=(0.05, 0.1), samples=40,
                    dt=0.01, seed=2),
    "diffusion": dict(kappa=8 / 3, r=1.0, T=0.5, dt=1e-3, samples=200, seed=4),
    # spacing T/(n-1) must be a dt multiple or the snapped grid is ragged
    "holder": dict(kappa=2.0, T=1.0, dt=2.0**-12, n=1025, seed=0),
    "yn": dict(kappa=8 / 3, r=1.0, n=4, samples=10, seed=2),
}


def test_c12_determinism(verdict, tmp_path):
    # reruns and worker counts must not move a single output byte;
    # only the runtime sidecar may differ
    t0 = time.time()
    diffs = []
    for name, base in SMALL_CONFIGS.items():
        outputs = []
        for tag, workers in (("a", 1), ("b", 1), ("c", 2)):
            out = tmp_path / name / tag
            run(ExperimentConfig(
                experiment=name, out_dir=str(out), workers=workers, **base
            ))
            blobs = {}
            for fname in sorted(os.listdir(out)):
                if fname.endswith("_runtime.json"):
                    continue
                blobs[fname] = (out / fname).read_bytes()
            outputs.append(blobs)
        if not (outputs[0] == outputs[1] == outputs[2]):
            diffs.append(name)
    ok = not diffs
    verdict(
        "12 determinism", ok,
        (f"divergent experiments: {diffs}" if diffs else
         "8 experiments x {rerun, 2 workers} byte-identical")
        + f", {time.time() - t0:.0f}s",
    )
