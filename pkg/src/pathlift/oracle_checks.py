"""Self-validation identities for map oracles.

These are the run-anywhere consistency checks: the Jacobian and its
adjoint must be mutually adjoint in the weighted inner product, the
second differential must be symmetric, the Jacobian must be linear in
its direction, and analytic Jacobians must agree with central finite
differences.  The CLI ``validate`` subcommand runs them on whatever
problem the config describes.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    tol: float

    def line(self):
        mark = "pass" if self.passed else "FAIL"
        return (f"{mark}  {self.name}: worst = {self.worst:.3e} "
                f"(tol {self.tol:.1e})")


def _sample_point(oracle, rng, scale=1.0):
    return scale * rng.standard_normal(oracle.dim_domain)


def check_adjoint_identity(oracle, samples=50, seed=0, tol=None,
                           scale=1.0):
    """|<dF v, z> - <v, dF^* z>_X| over random triples."""
    if tol is None:
        tol = 1e-10 if oracle.has_analytic_second else 1e-6
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        u = _sample_point(oracle, rng, scale)
        v = rng.standard_normal(oracle.dim_domain)
        z = rng.standard_normal(oracle.dim_codomain)
        lhs = float(np.dot(oracle.apply_jacobian(u, v), z))
        rhs = oracle.inner(v, oracle.apply_adjoint(u, z))
        worst = max(worst, abs(lhs - rhs) / (1.0 + oracle.norm(v)
                                             * np.linalg.norm(z)))
    return CheckResult("adjoint identity", worst <= tol, worst, tol)


def check_second_symmetry(oracle, samples=20, seed=1, tol=None, scale=1.0):
    """Relative asymmetry of the z-contracted second differential."""
    if tol is None:
        tol = 1e-8 if oracle.has_analytic_second else 1e-5
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        u = _sample_point(oracle, rng, scale)
        v = rng.standard_normal(oracle.dim_domain)
        w = rng.standard_normal(oracle.dim_domain)
        z = rng.standard_normal(oracle.dim_codomain)
        a = oracle.bilinear_second(u, z, v, w)
        b = oracle.bilinear_second(u, z, w, v)
        denom = max(abs(a), abs(b), 1.0)
        worst = max(worst, abs(a - b) / denom)
    return CheckResult("second-differential symmetry", worst <= tol,
                       worst, tol)


def check_jacobian_linearity(oracle, samples=20, seed=2, tol=1e-12,
                             scale=1.0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        u = _sample_point(oracle, rng, scale)
        v = rng.standard_normal(oracle.dim_domain)
        w = rng.standard_normal(oracle.dim_domain)
        a, b = rng.standard_normal(2)
        lhs = oracle.apply_jacobian(u, a * v + b * w)
        rhs = a * oracle.apply_jacobian(u, v) + b * oracle.apply_jacobian(
            u, w)
        denom = 1.0 + float(np.linalg.norm(rhs))
        worst = max(worst, float(np.linalg.norm(lhs - rhs)) / denom)
    return CheckResult("jacobian linearity", worst <= tol, worst, tol)


def check_jacobian_fd(oracle, samples=5, seed=3, tol=1e-5, scale=1.0):
    """Analytic-vs-finite-difference Jacobian, relative Frobenius error."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        u = _sample_point(oracle, rng, scale)
        ja = oracle.jacobian(u)
        jf = oracle.fd_jacobian(u)
        denom = max(float(np.linalg.norm(ja)), 1.0)
        worst = max(worst, float(np.linalg.norm(ja - jf)) / denom)
    return CheckResult("jacobian vs finite differences", worst <= tol,
                       worst, tol)


def validate_oracle(oracle, seed=0, scale=1.0):
    """Run the full identity suite; returns a list of CheckResult."""
    return [
        check_adjoint_identity(oracle, seed=seed, scale=scale),
        check_second_symmetry(oracle, seed=seed + 1, scale=scale),
        check_jacobian_linearity(oracle, seed=seed + 2, scale=scale),
        check_jacobian_fd(oracle, seed=seed + 3, scale=scale),
    ]
