"""Experiment runner: one subcommand per experiment family.

Configuration comes from per-experiment defaults, then an optional JSON
config file, then command-line flags (flags win).  Every run writes a
deterministic record JSON (plus CSV tables unless --format json embeds
them); wall-clock time goes to a separate *_runtime.json sidecar so the
record itself is byte-identical across reruns and worker counts.  The
defaults are exactly the parameters the acceptance suite uses, so e.g.
`sle-lab moments` reproduces the published acceptance numbers.

Exit codes: 0 success, 2 validation error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from . import _report
from .driving import DrivingPath, sample_brownian
from .errors import ConfigInvalid, ValidationError
from .exponents import alpha_curve, derive_exponents, r_critical, solve_critical
from .loewner import trace
from . import diffusion as _diffusion
from . import estimators as _estimators

EXPERIMENTS = (
    "exponents", "alpha_curve", "trace", "moments",
    "typical", "diffusion", "holder", "yn",
)

# Acceptance-suite parameters; `sle-lab <experiment>` with no flags runs
# exactly these.
DEFAULTS = {
    "exponents": dict(kappa=1.0),
    "alpha_curve": dict(kappa_min=0.5, kappa_max=32.0, n=25),
    "trace": dict(kappa=2.0, T=1.0, dt=1e-5, seed=7, n=1001),
    "moments": dict(kappa=8.0 / 3.0, r=1.0, t_grid=(2.0, 4.0, 8.0, 16.0),
                    samples=20000, dt=1e-3, seed=7, method="reverse_flow"),
    "typical": dict(kappa=2.0, T=1.0,
                    y_grid=(0.00625, 0.0125, 0.025, 0.05, 0.1),
                    samples=4000, dt=2e-3, seed=5),
    "diffusion": dict(kappa=8.0 / 3.0, r=1.0, T=1.0, dt=2.5e-4,
                      samples=100000, seed=11),
    "holder": dict(kappa=2.0, T=1.0, dt=2.0 ** -15, n=16385, seed=0),
    "yn": dict(kappa=8.0 / 3.0, r=1.0, n=16, samples=500, seed=3),
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    kappa: Optional[float] = None
    r: Optional[float] = None
    T: Optional[float] = None
    dt: Optional[float] = None
    y_min: Optional[float] = None
    samples: Optional[int] = None
    n: Optional[int] = None
    seed: int = 0
    out_dir: str = "."
    format: str = "csv"
    workers: int = 1
    method: Optional[str] = None
    t_grid: Optional[tuple] = None
    y_grid: Optional[tuple] = None
    kappa_min: Optional[float] = None
    kappa_max: Optional[float] = None

    def echo(self) -> dict:
        """Semantic fields only: what a rerun needs to reproduce bytes.

        out_dir and workers are excluded on purpose; neither affects
        any emitted number.
        """
        skip = {"out_dir", "workers"}
        out = {}
        for k, v in self.__dict__.items():
            if k in skip or v is None:
                continue
            out[k] = list(v) if isinstance(v, tuple) else v
        return out


@dataclass(frozen=True)
class ResultRecord:
    experiment: str
    version: str
    input_hash: str
    config: dict
    estimates: dict
    tables: dict
    files: list
    runtime_s: float

    def to_json_dict(self) -> dict:
        """The deterministic part (everything but the wall clock)."""
        return {
            "experiment": self.experiment,
            "version": self.version,
            "input_hash": self.input_hash,
            "config": self.config,
            "estimates": self.estimates,
            "tables": self.tables,
            "files": self.files,
        }


def _content_hash(echo: dict) -> str:
    """Hash of the canonical config echo, git blob style."""
    import json

    body = json.dumps(_report.canonical(echo), sort_keys=True).encode()
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


# ---------------------------------------------------------------------------
# validation

_REQUIRED = {
    "exponents": ("kappa",),
    "alpha_curve": ("kappa_min", "kappa_max", "n"),
    "trace": ("kappa", "T", "dt", "n"),
    "moments": ("kappa", "r", "t_grid", "samples", "dt"),
    "typical": ("kappa", "T", "y_grid", "samples", "dt"),
    "diffusion": ("kappa", "r", "T", "dt", "samples"),
    "holder": ("kappa", "T", "dt", "n"),
    "yn": ("kappa", "r", "n", "samples"),
}


def validate(config: ExperimentConfig) -> list:
    """Violation strings for everything run() would reject, or [].

    Pure precondition checks; nothing is computed or written.
    """
    c = config
    if c.experiment not in EXPERIMENTS:
        return [f"unknown experiment {c.experiment!r}"]
    v = []
    for name in _REQUIRED[c.experiment]:
        if getattr(c, name) is None:
            v.append(f"missing field {name}")
    if c.kappa is not None and not c.kappa > 0:
        v.append("kappa must be positive")
    if c.dt is not None and not c.dt > 0:
        v.append("dt must be positive")
    if c.T is not None and not c.T > 0:
        v.append("T must be positive")
    if c.y_min is not None and not c.y_min > 0:
        v.append("y_min must be positive")
    if c.samples is not None and c.samples < 1:
        v.append("samples must be positive")
    if not isinstance(c.seed, (int, np.integer)) or c.seed < 0:
        v.append("seed must be a nonnegative integer")
    if c.format not in ("csv", "json"):
        v.append("format must be csv or json")
    if c.workers is not None and c.workers < 1:
        v.append("workers must be positive")

    needs_r = c.experiment in ("moments", "diffusion", "yn")
    if needs_r and c.kappa is not None and c.kappa > 0 and c.r is not None:
        if c.r >= r_critical(c.kappa):
            v.append("r ≥ r_c")
        elif c.experiment == "yn":
            p = derive_exponents(c.kappa, c.r)
            if p.lam * p.beta + p.zeta >= 2.0:
                v.append("λβ+ζ ≥ 2")
    if c.experiment == "yn" and c.n is not None and not 2 <= c.n <= 64:
        v.append("n must be between 2 and 64")
    if c.experiment == "trace" and c.n is not None and c.n < 2:
        v.append("points must be at least 2")
    if c.experiment == "holder" and c.n is not None and c.n < 1024:
        v.append("holder needs at least 1024 trace points")
    if c.experiment == "moments":
        if c.samples is not None and c.samples < 100:
            v.append("moments needs at least 100 samples")
        if c.method is not None and c.method not in ("reverse_flow", "diffusion"):
            v.append("method must be reverse_flow or diffusion")
        if c.t_grid is not None:
            tg = np.asarray(c.t_grid, dtype=float)
            if tg.size == 0 or tg.min() < 1.0 or tg.max() > 32.0:
                v.append("t_grid must lie within [1, 32]")
    if c.experiment == "typical" and c.y_grid is not None:
        yg = np.asarray(c.y_grid, dtype=float)
        if yg.size < 2:
            v.append("y_grid needs at least two heights")
        elif yg.min() < 1e-4 or yg.max() > 1e-1:
            v.append("y_grid must lie within [1e-4, 1e-1]")
    if c.experiment == "alpha_curve":
        if c.kappa_min is None or c.kappa_max is None or c.n is None:
            v.append("alpha_curve needs kappa_min, kappa_max and points")
        else:
            if not 0 < c.kappa_min < c.kappa_max:
                v.append("need 0 < kappa_min < kappa_max")
            if c.n < 2:
                v.append("points must be at least 2")
    return v


# ---------------------------------------------------------------------------
# experiment bodies: each returns (estimates, [(name, header, columns), ...])


def emit_alpha_curve(kappa_min: float, kappa_max: float, points: int, out) -> str:
    """Write the kappa -> (alpha_star, alpha_zero) curve as plot data.

    Log-uniform kappa grid, CSV `kappa,alpha_star,alpha_zero`.  Returns
    the path written.
    """
    bad = []
    if not 0 < kappa_min < kappa_max:
        bad.append("need 0 < kappa_min < kappa_max")
    if points < 2:
        bad.append("points must be at least 2")
    if bad:
        raise ConfigInvalid(bad)
    ks = np.geomspace(kappa_min, kappa_max, int(points))
    rows = alpha_curve(ks)
    _report.write_table(
        out, ["kappa", "alpha_star", "alpha_zero"],
        [np.array([row[j] for row in rows]) for j in range(3)],
    )
    return str(out)


def _run_exponents(c: ExperimentConfig):
    crit = solve_critical(c.kappa)
    est = {
        "kappa": c.kappa,
        "r_c": r_critical(c.kappa),
        "r_plus": crit.r_plus,
        "beta_plus": crit.beta_plus,
        "lambda_plus": crit.lambda_plus,
        "zeta_plus": crit.zeta_plus,
        "alpha_star": crit.alpha_star,
        "alpha_zero": crit.alpha_zero,
        "exponent_vanishes": crit.exponent_vanishes,
    }
    # the CSV row needs a concrete r; the critical root is the natural pick
    at_r = derive_exponents(c.kappa, c.r if c.r is not None else crit.r_plus)
    if c.r is not None:
        est["at_r"] = at_r.to_row()
    header = ["kappa", "r", "lambda", "zeta", "beta", "q",
              "r_c", "r_plus", "beta_plus", "alpha_star", "alpha_zero"]
    row = [c.kappa, at_r.r, at_r.lam, at_r.zeta, at_r.beta, at_r.q,
           at_r.r_c, crit.r_plus, crit.beta_plus, crit.alpha_star,
           crit.alpha_zero]
    cols = [np.array([v], dtype=float) for v in row]
    return est, [("exponents", header, cols)]


def _run_alpha_curve(c: ExperimentConfig):
    ks = np.geomspace(c.kappa_min, c.kappa_max, int(c.n))
    rows = alpha_curve(ks)
    cols = [np.array([row[j] for row in rows]) for j in range(3)]
    est = {"kappa_min": c.kappa_min, "kappa_max": c.kappa_max, "points": int(c.n)}
    return est, [("alpha_curve", ["kappa", "alpha_star", "alpha_zero"], cols)]


def _trace_for(c: ExperimentConfig):
    path = sample_brownian(c.kappa, c.T, c.dt, c.seed)
    times = np.linspace(0.0, c.T, int(c.n))
    return trace(path, times, y_min=c.y_min)


def _run_trace(c: ExperimentConfig):
    tr = _trace_for(c)
    est = {
        "kappa": c.kappa, "T": c.T, "dt": c.dt, "seed": c.seed,
        "points": int(tr.times.size), "y_min": tr.y_min,
        "max_height": float(tr.points.imag.max()),
    }
    cols = [tr.times, tr.points.real, tr.points.imag]
    return est, [("trace", ["t", "re", "im"], cols)]


def _run_moments(c: ExperimentConfig):
    res = _estimators.estimate_moment(
        c.kappa, c.r, c.t_grid, c.samples, dt=c.dt, seed=c.seed,
        method=c.method or "reverse_flow", workers=c.workers,
    )
    est = {
        "params": res.params.to_row(),
        "samples": res.samples,
        "method": res.method,
        "slope": res.slope,
        "slope_ci": list(res.slope_ci),
        "slope_target": -res.params.zeta,
    }
    cols = [res.t_grid, res.mean, res.stderr, res.heavy_tail.astype(int)]
    return est, [("moments", ["t", "mean", "stderr", "heavy_tail"], cols)]


def _run_typical(c: ExperimentConfig):
    res = _estimators.estimate_typical_exponent(
        c.kappa, c.T, c.y_grid, c.samples, seed=c.seed, rel_step=c.dt,
        workers=c.workers,
    )
    est = {
        "kappa": c.kappa, "t": c.T, "samples": res.samples,
        "slope": res.slope, "ci": list(res.ci),
        "slope_target": 4.0 / (4.0 + c.kappa),
    }
    return est, [("typical", ["y", "mean_log"], [res.y_grid, res.mean_log])]


def _run_diffusion(c: ExperimentConfig):
    params = derive_exponents(c.kappa, c.r)
    n_t = _diffusion.martingale_terminal(
        params, c.T, c.dt, c.seed, c.samples, workers=c.workers
    )
    path = _diffusion.simulate_J(params, c.T, c.dt, seed=c.seed)
    est = {
        "params": params.to_row(),
        "samples": int(c.samples),
        "N_mean": float(n_t.mean()),
        "N_stderr": float(n_t.std(ddof=1) / np.sqrt(c.samples)),
        "N_target": 1.0,
    }
    cols = [path.times, path.J, path.L, path.sigma]
    return est, [("diffusion_path", ["t", "J", "L", "sigma"], cols)]


def _run_holder(c: ExperimentConfig):
    tr = _trace_for(c)
    res = _estimators.estimate_holder(tr, eps=0.1 * c.T)
    est = {
        "kappa": c.kappa, "seed": c.seed, "points": int(c.n),
        "alpha_hat": res.alpha_hat, "r2": res.r2,
        "interval": list(res.interval),
        "alpha_star": solve_critical(c.kappa).alpha_star,
    }
    return est, [("holder", ["scale", "osc"], [res.scale_grid, res.osc])]


def _run_yn(c: ExperimentConfig):
    res = _estimators.y_n_statistic(
        c.kappa, c.r, c.n, c.samples, seed=c.seed, workers=c.workers
    )
    env = res.event_params["envelope"]
    est = {
        "params": res.params.to_row(),
        "n": res.n, "samples": res.samples,
        "mean_Y": res.mean_Y, "mean_Y2": res.mean_Y2, "ratio": res.ratio,
        "stderr_Y": res.stderr_Y,
        "per_term_mean": res.per_term_mean,
        "event_rate": res.event_rate,
        "envelope": {"c": env.c, "p": env.p},
    }
    cols = [res.j_values.astype(float), res.per_term]
    return est, [("yn", ["j", "per_term"], cols)]


_BODIES = {
    "exponents": _run_exponents,
    "alpha_curve": _run_alpha_curve,
    "trace": _run_trace,
    "moments": _run_moments,
    "typical": _run_typical,
    "diffusion": _run_diffusion,
    "holder": _run_holder,
    "yn": _run_yn,
}


def run(config: ExperimentConfig) -> ResultRecord:
    """Validate, execute, persist.  Raises ConfigInvalid on bad config."""
    violations = validate(config)
    if violations:
        raise ConfigInvalid(violations)
    t0 = time.perf_counter()
    estimates, table_specs = _BODIES[config.experiment](config)
    os.makedirs(config.out_dir, exist_ok=True)

    files = []
    tables = {}
    for name, header, cols in table_specs:
        if config.format == "csv":
            fname = f"{name}.csv"
            _report.write_table(os.path.join(config.out_dir, fname), header, cols)
            files.append(fname)
        else:
            tables[name] = {
                "header": list(header),
                "columns": [np.asarray(col) for col in cols],
            }

    echo = config.echo()
    record = ResultRecord(
        experiment=config.experiment,
        version=__version__,
        input_hash=_content_hash(echo),
        config=_report.canonical(echo),
        estimates=_report.canonical(estimates),
        tables=_report.canonical(tables),
        files=sorted(files),
        runtime_s=time.perf_counter() - t0,
    )
    record_name = f"{config.experiment}_record.json"
    _report.write_json(os.path.join(config.out_dir, record_name), record.to_json_dict())
    _report.write_json(
        os.path.join(config.out_dir, f"{config.experiment}_runtime.json"),
        {"experiment": config.experiment, "runtime_s": record.runtime_s},
    )
    return record


# ---------------------------------------------------------------------------
# argument parsing


def _csv_floats(text: str) -> tuple:
    return tuple(float(x) for x in text.split(","))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sle-lab",
        description="Loewner-flow experiments: exponents, traces, "
        "derivative moments, the radial diffusion and trace regularity.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="experiment")

    names = {
        "exponents": "critical exponents and the Holder curve at one kappa",
        "alpha-curve": "alpha_star/alpha_zero over a log-uniform kappa grid",
        "trace": "sample a driver and emit the traced curve",
        "moments": "derivative moment scaling E[|h'_{t^2}(i)|^lambda]",
        "typical": "typical derivative exponent from E log|f'(iy)|",
        "diffusion": "radial diffusion: martingale mean and a path dump",
        "holder": "oscillation-based Holder exponent of a sampled trace",
        "yn": "second-moment statistic Y_n with the sandwich event",
    }
    for cli_name, help_text in names.items():
        p = sub.add_parser(cli_name, help=help_text)
        p.add_argument("--config", help="JSON file of config fields; flags win")
        p.add_argument("--kappa", type=float)
        p.add_argument("--r", type=float)
        p.add_argument("--T", type=float)
        p.add_argument("--dt", type=float)
        p.add_argument("--y-min", dest="y_min", type=float)
        p.add_argument("--samples", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory (SLE_LAB_OUT overrides)")
        p.add_argument("--workers", type=int)
        p.add_argument("--format", choices=("csv", "json"))
        if cli_name == "alpha-curve":
            p.add_argument("--kappa-min", dest="kappa_min", type=float)
            p.add_argument("--kappa-max", dest="kappa_max", type=float)
            p.add_argument("--points", dest="n", type=int)
        elif cli_name in ("trace", "holder"):
            p.add_argument("--points", dest="n", type=int)
        elif cli_name == "yn":
            p.add_argument("--n", dest="n", type=int)
        elif cli_name == "moments":
            p.add_argument("--t-grid", dest="t_grid", type=_csv_floats)
            p.add_argument("--method", choices=("reverse_flow", "diffusion"))
        elif cli_name == "typical":
            p.add_argument("--y-grid", dest="y_grid", type=_csv_floats)
    return parser


def build_config(argv=None) -> ExperimentConfig:
    args = _build_parser().parse_args(argv)
    experiment = args.command.replace("-", "_")

    merged = dict(DEFAULTS[experiment])
    if args.config:
        try:
            loaded = _report.read_json(args.config)
        except OSError as exc:
            raise ConfigInvalid([f"cannot read config file: {exc}"])
        except ValueError as exc:
            raise ConfigInvalid([f"config file is not valid JSON: {exc}"])
        if not isinstance(loaded, dict):
            raise ConfigInvalid(["config file must hold a JSON object"])
        loaded.pop("experiment", None)
        for key, val in loaded.items():
            merged[key] = tuple(val) if isinstance(val, list) else val
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        merged["out_dir" if key == "out" else key] = val
    env_out = os.environ.get("SLE_LAB_OUT")
    if env_out:
        merged["out_dir"] = env_out

    allowed = set(ExperimentConfig.__dataclass_fields__) - {"experiment"}
    unknown = sorted(set(merged) - allowed)
    if unknown:
        raise ConfigInvalid([f"unknown config field {k!r}" for k in unknown])
    return ExperimentConfig(experiment=experiment, **merged)


def main(argv=None) -> int:
    try:
        config = build_config(argv)
    except ConfigInvalid as exc:
        for item in exc.violations:
            print(f"error: {item}", file=sys.stderr)
        return 2

    violations = validate(config)
    if violations:
        for item in violations:
            print(f"error: {item}", file=sys.stderr)
        return 2
    try:
        record = run(config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, FloatingPointError, OverflowError, ZeroDivisionError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    print(f"record: {os.path.join(config.out_dir, config.experiment + '_record.json')}")
    for fname in record.files:
        print(f"data: {os.path.join(config.out_dir, fname)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
