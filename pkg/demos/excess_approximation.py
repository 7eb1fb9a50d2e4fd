"""How well the EPD approximates relative excesses compared with a pure Pareto.

For the Pareto mixture with survival (1+c)^-1 x^-a (1 + c x^-a) the second
order deviation delta(u) is known exactly. Normalizing the sup-error by
|delta(u)| shows the Pareto error is of order delta(u) while the EPD error
vanishes faster.

    python demos/excess_approximation.py
"""

import numpy as np

from heavytail import ParetoMixture, prop1_rate_check


def main():
    model = ParetoMixture(2.0, 2.0)
    y = np.geomspace(1.0, 1e4, 201)
    print(f"{'u':>6} {'delta(u)':>10} {'EPD err/|delta|':>16} {'Pareto err/|delta|':>19}")
    for c in prop1_rate_check(model, [10.0, 30.0, 100.0, 300.0, 1000.0], y):
        print(f"{c.u:>6g} {c.delta_u:>10.2e} {c.epd_ratio:>16.3e} {c.pareto_ratio:>19.4f}")


if __name__ == "__main__":
    main()
