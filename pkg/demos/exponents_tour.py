"""Tour of the exponent algebra, no simulation involved.

Walks the derived quantities for a few classic kappa values, checks the
closed forms against the root solver, and prints the alpha(kappa) curve
around its zero at kappa = 8.
"""

import numpy as np

from sle_lab import (
    alpha_curve,
    alpha_star_closed_form,
    beta_plus_closed_form,
    derive_exponents,
    r_critical,
    solve_critical,
)


def main():
    print("derived exponents at r = 1")
    print(f"{'kappa':>6} {'r_c':>8} {'lambda':>9} {'zeta':>9} {'beta':>9}")
    for kappa in (0.5, 2.0, 8 / 3, 4.0, 6.0):
        p = derive_exponents(kappa, 1.0)
        print(f"{kappa:6.3f} {p.r_c:8.4f} {p.lam:9.5f} {p.zeta:9.5f} {p.beta:9.5f}")

    print()
    print("critical weight solve vs closed forms")
    print(f"{'kappa':>6} {'r_plus':>9} {'beta_plus':>10} {'closed':>10} {'alpha*':>8}")
    for kappa in (2.0, 8 / 3, 4.0, 6.0, 8.0, 16.0):
        c = solve_critical(kappa)
        bp = beta_plus_closed_form(kappa)
        print(
            f"{kappa:6.3f} {c.r_plus:9.5f} {c.beta_plus:10.6f} "
            f"{bp:10.6f} {c.alpha_star:8.5f}"
        )
        ident = c.lambda_plus * c.beta_plus + c.zeta_plus
        assert abs(ident - 2.0) < 1e-9

    print()
    print("alpha*(kappa) dips to zero exactly at kappa = 8, then recovers:")
    grid = alpha_curve(np.linspace(6.0, 12.0, 7))
    for kappa, a_star, a_zero in grid:
        bar = "#" * int(round(60 * a_star))
        print(f"  kappa {kappa:6.3f}  alpha* {a_star:7.4f}  {bar}")
    assert abs(alpha_star_closed_form(8.0)) < 1e-12

    # the critical weight falls toward 1/2 like 4/kappa
    print()
    ks = np.geomspace(1, 256, 9)
    print("r_c ->", ", ".join(f"{r_critical(k):.3f}" for k in ks))


if __name__ == "__main__":
    main()
