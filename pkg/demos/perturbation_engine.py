"""Run the order-by-order solver on the resonant balanced Hamiltonian.

The solver splits each order of the interaction into a part commuting
with H0 (kept, the constant of motion C_k) and a part rotated away by a
generator Z_k.  After n orders the transformed Hamiltonian equals
H0 + C(lambda) up to a residual of size lambda^{n+1}; halving lambda
should shrink the order-n residual by 2^{n+1}.
"""

import math

from iontrap import ModelParams, SpaceConfig, Regime, regime_series
from iontrap.engine import decompose, solve, residual_norm


def main():
    space = SpaceConfig(n_max=40, interior_margin=10)
    p = ModelParams.from_balanced(1.0, 1.0, 0.0, 0.05)
    regime = Regime.of("eta_much_less", p)
    h0, series = regime_series(p, regime, space)
    spec = decompose(h0)
    print(f"reference spectrum: {spec.dim} levels in "
          f"{len(spec.clusters)} degenerate clusters")

    sol = solve(spec, series, 2)
    print(f"solved to order {sol.order}; generators Z_1..Z_{sol.order} and "
          f"constants C_1..C_{sol.order} in hand\n")

    lams = (0.02, 0.04, 0.08, 0.16)
    print("residual after keeping n orders (interior norm):")
    header = f"  {'lambda':>8}" + "".join(f"  {f'n={n}':>12}" for n in (1, 2))
    print(header)
    rows = {n: [residual_norm(spec, series, sol, lam, upto=n) for lam in lams]
            for n in (1, 2)}
    for i, lam in enumerate(lams):
        print(f"  {lam:8.2f}" + "".join(f"  {rows[n][i]:12.3e}" for n in (1, 2)))

    print("\nper-halving decay exponents (expected n+1):")
    for n in (1, 2):
        exps = [math.log(rows[n][i + 1] / rows[n][i]) / math.log(2)
                for i in range(len(lams) - 1)]
        print(f"  n={n}: " + ", ".join(f"{e:.2f}" for e in exps))


if __name__ == "__main__":
    main()
