"""Derivative scaling three ways: moments, typical decay, trace Holder.

The headline numbers all concern |f'_t| near the tip.  Moments of
|h'_{t^2}(i)| decay like t^(-zeta); the typical (log-scale) decay rate
is 4/(4+kappa); and both feed the Holder exponent of the trace itself.
The last stanza runs the guarded second-moment statistic Y_n whose
non-degeneracy underpins the almost-sure statements.
"""

import numpy as np

from sle_lab import (
    calibrate_envelope,
    deterministic_driver,
    estimate_holder,
    estimate_moment,
    estimate_typical_exponent,
    sample_brownian,
    solve_critical,
    trace,
    y_n_statistic,
)


def main():
    print("moment scaling E|h'_{t^2}(i)|^lambda ~ t^-zeta")
    for kappa, r in ((8 / 3, 1.0), (2.0, 0.5)):
        m = estimate_moment(kappa, r, (2.0, 4.0, 8.0, 16.0), 8000, dt=1e-3, seed=7)
        lo, hi = m.slope_ci
        print(
            f"  kappa={kappa:g}, r={r:g}: slope {m.slope:+.4f} "
            f"[{lo:+.4f}, {hi:+.4f}]  vs -zeta = {-m.params.zeta:+.4f}"
        )

    print()
    print("typical decay of log|fhat'_t(iy)| / log y -> 4/(4+kappa)")
    y_grid = (0.00625, 0.0125, 0.025, 0.05, 0.1)
    for kappa in (2.0, 8.0):
        te = estimate_typical_exponent(kappa, 1.0, y_grid, 2000, seed=5)
        print(
            f"  kappa={kappa:g}: slope {te.slope:.4f} "
            f"vs {4 / (4 + kappa):.4f}"
        )

    print()
    print("Holder exponent of the trace (oscillation regression)")
    n = 2**13 + 1
    times = np.linspace(0.0, 1.0, n)
    slit = deterministic_driver("constant", 1.0, 2.0**-14)
    est = estimate_holder(trace(slit, times), eps=0.0)
    print(f"  constant driver: alpha_hat {est.alpha_hat:.3f} (exactly 1/2 in the limit)")
    # random traces converge from above, logarithmically slowly in dt;
    # at this resolution the estimate still sits well over alpha_zero
    for kappa in (2.0, 6.0):
        path = sample_brownian(kappa, 1.0, 2.0**-14, seed=4)
        est = estimate_holder(trace(path, times), eps=0.1)
        a0 = solve_critical(kappa).alpha_zero
        print(
            f"  kappa={kappa:g}: alpha_hat {est.alpha_hat:.3f} "
            f"(r2 {est.r2:.3f}), asymptotic guarantee {a0:.3f}"
        )

    print()
    print("second-moment statistic Y_n at kappa=8/3, r=1")
    env = calibrate_envelope(8 / 3, 1.0, seed=3)
    print(f"  calibrated envelope: c = {env.c:.3f}, p = {env.p:g}")
    for n in (4, 8, 16):
        yn = y_n_statistic(8 / 3, 1.0, n, 200, seed=3, envelope=env)
        print(
            f"  n={n:2d}: ratio E[Y]^2/E[Y^2] = {yn.ratio:.3f}, "
            f"per-term mean {yn.per_term_mean:.3e} (want ~ n^-2 decay)"
        )


if __name__ == "__main__":
    main()
