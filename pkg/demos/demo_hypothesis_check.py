"""Probe the solver's sufficient conditions by seeded shell sampling.

The checker estimates, on shells ||u|| = r: the bound C on the
z-contracted second differential, the coercivity ratio K that keeps the
blowup indicator integrable, the power-law product condition with weight
xi(s) = c s^p, and the growth rate of the Gramian inverse norm.  All
estimates are one-sided sample bounds -- a clean report only ever means
"not falsified on this sample".

The squared-norm map passes everything with its closed-form constants
(C = K = 2). A linear map is the designed failure: its second
differential vanishes identically, so K = 0 and the report is falsified.

Run:  python3 demos/demo_hypothesis_check.py
"""

import numpy as np

import pathlift as pl


def main():
    plan = pl.SamplingPlan(radii=(1.0, 2.0, 4.0, 8.0), per_radius=8,
                           z_samples=8, seed=0)

    print("=== squared-norm map (curved everywhere) ===")
    report = pl.check_report(pl.SphereMap(3), plan,
                             xi=pl.PowerLawXi(c=1.0, p=1.0))
    print(report.to_text())

    print("=== linear map (flat: the designed failure) ===")
    rng = np.random.default_rng(7)
    report = pl.check_report(pl.LinearMap(rng.standard_normal((3, 6))),
                             plan)
    print(report.to_text())
    print("falsified:", report.falsified)


if __name__ == "__main__":
    main()
