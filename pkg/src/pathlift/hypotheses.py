"""Sampling-based falsification checks for the solver's sufficient conditions.

Four conditions are probed on seeded shells ||u||_X = r:

* a uniform bound C on the z-contracted second differential over unit
  directions (estimated from below by sampling plus power iteration);
* the coercivity ratio |z^* d2F(phi_z, phi_z)| / ||phi_z||^2 whose
  infimum K keeps the blowup indicator integrable into a terminal
  singularity;
* the weighted product condition with a power-law weight xi(s) = c s^p,
  whose divergence requirement restricts p <= 1;
* quadratic growth of the Gramian inverse norm 1/lambda_1 in 1 + ||u||.

Estimates are one-sided sample bounds, never suprema or infima; every
report records the seed and sample counts, and a report states at most
"not falsified on this sample".
"""

import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidXi
from .spectrum import gramian, spectral_decompose

POWER_ITERATIONS = 20
GROWTH_SLOPE_LIMIT = 2.0
GROWTH_SLOPE_TOL = 0.1
DEGENERATE_SWITCHING = 1e-12


@dataclass(frozen=True)
class SamplingPlan:
    """Seeded shell-sampling plan; radii are the shell norms ||u||_X."""

    radii: tuple
    per_radius: int = 8
    z_samples: int = 8
    seed: int = 0

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if not radii or any(r <= 0 for r in radii):
            raise ValueError("radii must be positive")
        if list(radii) != sorted(radii):
            raise ValueError("radii must be increasing")
        if self.per_radius < 1 or self.z_samples < 1:
            raise ValueError("sample counts must be >= 1")
        object.__setattr__(self, "radii", radii)


@dataclass(frozen=True)
class PowerLawXi:
    """xi(s) = c * s^p; the reciprocal integral diverges iff p <= 1."""

    c: float
    p: float

    def __post_init__(self):
        if self.c <= 0:
            raise InvalidXi("xi coefficient c must be positive")
        if self.p > 1.0:
            raise InvalidXi(
                f"xi exponent p = {self.p} > 1: the reciprocal integral "
                "converges, the growth hypothesis is vacuous")

    def __call__(self, s):
        return self.c * s ** self.p


@dataclass
class ShellStats:
    radius: float
    samples: int
    skipped: int
    c_max: float
    k_min: float
    xi_margin_min: float
    inv_gramian_max: float
    gap_margin_min: float
    singular_found: int


@dataclass
class HypothesisReport:
    plan: SamplingPlan
    lambda0: float
    xi: PowerLawXi | None
    c_est: float                 # max observed |z* d2F(.,.)|
    k_est: float                 # min observed coercivity ratio
    xi_margin_min: float         # min product-condition margin (pass >= 1)
    xi_pass: bool
    growth_slope: float
    growth_intercept: float
    growth_pass: bool
    gap_margin: float            # min over samples of min_{i>=2} lam_i - lam0
    gap_pass: bool
    remark_alpha: float
    remark_k1: float
    remark_k2: float
    shells: list = field(default_factory=list)
    skipped_samples: int = 0
    singular_samples: int = 0

    @property
    def falsified(self):
        return not (self.xi_pass and self.growth_pass and self.gap_pass
                    and self.k_est > 0.0)

    def to_text(self):
        out = io.StringIO()
        w = out.write
        w("hypothesis check report\n")
        w(f"seed = {self.plan.seed}, per_radius = {self.plan.per_radius}, "
          f"z_samples = {self.plan.z_samples}\n")
        w(f"radii = {list(self.plan.radii)}\n")
        w("estimates are sample bounds only; 'pass' means not falsified "
          "on this sample\n\n")
        w(f"second-differential bound  C_est = {self.c_est:.17g}\n")
        w(f"coercivity ratio           K_est = {self.k_est:.17g}  "
          f"({'pass' if self.k_est > 0 else 'FAIL'})\n")
        if self.xi is not None:
            w(f"product condition (xi = {self.xi.c:g} * s^{self.xi.p:g}): "
              f"min margin = {self.xi_margin_min:.17g}  "
              f"({'pass' if self.xi_pass else 'FAIL'})\n")
            w(f"power-law split fit: alpha = {self.remark_alpha:.6g}, "
              f"K1 = {self.remark_k1:.6g}, K2 = {self.remark_k2:.6g}\n")
        w(f"Gramian-inverse growth: slope = {self.growth_slope:.6g} "
          f"(limit {GROWTH_SLOPE_LIMIT + GROWTH_SLOPE_TOL:g}), "
          f"intercept = {self.growth_intercept:.6g}  "
          f"({'pass' if self.growth_pass else 'FAIL'})\n")
        w(f"eigenvalue floor lambda0 = {self.lambda0:g}: worst margin = "
          f"{self.gap_margin:.6g}  "
          f"({'pass' if self.gap_pass else 'FAIL'})\n")
        w(f"skipped degenerate samples = {self.skipped_samples}, "
          f"singular samples = {self.singular_samples}\n\n")
        w("per-shell breakdown\n")
        w("radius,samples,skipped,c_max,k_min,xi_margin_min,"
          "inv_gramian_max,gap_margin_min,singular_found\n")
        for sh in self.shells:
            w(f"{sh.radius:.17g},{sh.samples},{sh.skipped},"
              f"{sh.c_max:.17g},{sh.k_min:.17g},{sh.xi_margin_min:.17g},"
              f"{sh.inv_gramian_max:.17g},{sh.gap_margin_min:.17g},"
              f"{sh.singular_found}\n")
        return out.getvalue()

    def shell_rows(self):
        header = ["radius", "samples", "skipped", "c_max", "k_min",
                  "xi_margin_min", "inv_gramian_max", "gap_margin_min",
                  "singular_found"]
        rows = [[sh.radius, sh.samples, sh.skipped, sh.c_max, sh.k_min,
                 sh.xi_margin_min, sh.inv_gramian_max, sh.gap_margin_min,
                 sh.singular_found] for sh in self.shells]
        return header, rows


def _unit_domain(oracle, rng):
    v = rng.standard_normal(oracle.dim_domain)
    nv = oracle.norm(v)
    while nv < 1e-12:
        v = rng.standard_normal(oracle.dim_domain)
        nv = oracle.norm(v)
    return v / nv


def _unit_codomain(n, rng):
    z = rng.standard_normal(n)
    nz = np.linalg.norm(z)
    while nz < 1e-12:
        z = rng.standard_normal(n)
        nz = np.linalg.norm(z)
    return z / nz


def estimate_bilinear_norm(oracle, u, z_count=8, v_count=8, seed=0):
    """Sampled lower estimate of sup |z^* d2F|_u(v, w)| over unit z, v, w,
    refined by power iteration on the symmetric operator for the
    maximizing z."""
    u = np.asarray(u, dtype=float)
    n = oracle.dim_codomain
    best = 0.0
    best_z = None
    best_v = None
    for j in range(z_count):
        rng = np.random.default_rng([seed, 7, j])
        z = _unit_codomain(n, rng)
        for _ in range(v_count):
            v = _unit_domain(oracle, rng)
            w = _unit_domain(oracle, rng)
            val = abs(oracle.bilinear_second(u, z, v, w))
            if val >= best:
                best, best_z, best_v = val, z, v
    if best_z is None:
        return 0.0
    v = best_v
    for _ in range(POWER_ITERATIONS):
        bv = oracle.second_operator(u, best_z, v)
        nv = oracle.norm(bv)
        if nv < 1e-14:
            break
        v = bv / nv
        best = max(best, abs(oracle.inner(v, oracle.second_operator(
            u, best_z, v))))
    return best


def coercivity_ratio(oracle, u, z):
    """|z^* d2F(phi_z, phi_z)| / ||phi_z||_X^2, or None when the
    switching function is degenerate at the sample."""
    u = np.asarray(u, dtype=float)
    z = np.asarray(z, dtype=float)
    phi = oracle.apply_adjoint(u, z)
    nphi2 = oracle.inner(phi, phi)
    if nphi2 <= DEGENERATE_SWITCHING ** 2:
        return None
    val = abs(oracle.inner(phi, oracle.second_operator(u, z, phi)))
    return val / nphi2


def xi_margin(oracle, u, z, xi):
    """Margin of the product condition at one sample; pass is >= 1."""
    u = np.asarray(u, dtype=float)
    phi = oracle.apply_adjoint(u, z)
    nphi2 = oracle.inner(phi, phi)
    if nphi2 <= DEGENERATE_SWITCHING ** 2:
        return None
    nphi = np.sqrt(nphi2)
    curv = abs(oracle.inner(phi, oracle.second_operator(u, z, phi)))
    return nphi * curv * xi(oracle.norm(u)) ** 2 / nphi2


def _sample_u(oracle, plan, shell_idx, sample_idx):
    rng = np.random.default_rng([plan.seed, shell_idx, sample_idx])
    return plan.radii[shell_idx] * _unit_domain(oracle, rng)


def _sample_z(oracle, plan, shell_idx, sample_idx, z_idx):
    rng = np.random.default_rng([plan.seed, shell_idx, sample_idx,
                                 1000 + z_idx])
    return _unit_codomain(oracle.dim_codomain, rng)


def _sample_spectrum(oracle, u):
    # sampling only reads eigenvalues, so basis ambiguity in a repeated
    # spectrum is harmless
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return spectral_decompose(gramian(oracle, u))


def gramian_inverse_growth(oracle, plan):
    """Per-shell max of 1/lambda_1 and the log-log growth fit.

    Returns (per_shell_max, slope, intercept, passed, singular_counts);
    singular samples are flagged and excluded from the fit.
    """
    shell_max = []
    singular_counts = []
    for si, r in enumerate(plan.radii):
        worst = 0.0
        singular = 0
        for k in range(plan.per_radius):
            u = _sample_u(oracle, plan, si, k)
            spec = _sample_spectrum(oracle, u)
            if spec.singular:
                singular += 1
                continue
            worst = max(worst, 1.0 / float(spec.lambdas[0]))
        shell_max.append(worst)
        singular_counts.append(singular)
    xs, ys = [], []
    for r, m in zip(plan.radii, shell_max):
        if m > 0.0:
            xs.append(np.log1p(r))
            ys.append(np.log(m))
    if len(xs) >= 2:
        slope, intercept = np.polyfit(xs, ys, 1)
    elif len(xs) == 1:
        slope, intercept = 0.0, ys[0]
    else:
        slope, intercept = 0.0, -np.inf
    passed = bool(np.isfinite(intercept) or not xs) and \
        slope <= GROWTH_SLOPE_LIMIT + GROWTH_SLOPE_TOL
    return shell_max, float(slope), float(intercept), passed, singular_counts


def check_report(oracle, plan, lambda0=1e-6, xi=None):
    """Run every estimator over the plan and aggregate.

    Deterministic given (oracle, plan): each sample draws from its own
    hashed substream, so doubling the counts extends the sample set
    without disturbing earlier draws.
    """
    n = oracle.dim_codomain
    shells = []
    c_est = 0.0
    k_est = np.inf
    xi_min = np.inf
    gap_margin = np.inf
    skipped_total = 0
    singular_total = 0
    log_r, log_ratio, log_phi = [], [], []
    shell_inv, growth_slope, growth_intercept, growth_pass, sing_counts = \
        gramian_inverse_growth(oracle, plan)
    for si, r in enumerate(plan.radii):
        sh_c = 0.0
        sh_k = np.inf
        sh_xi = np.inf
        sh_gap = np.inf
        skipped = 0
        for k in range(plan.per_radius):
            u = _sample_u(oracle, plan, si, k)
            spec = _sample_spectrum(oracle, u)
            if n > 1:
                sh_gap = min(sh_gap, float(np.min(spec.lambdas[1:]))
                             - lambda0)
            sh_c = max(sh_c, estimate_bilinear_norm(
                oracle, u, z_count=plan.z_samples, v_count=plan.z_samples,
                seed=plan.seed + 104729 * si + 1299721 * k))
            for j in range(plan.z_samples):
                z = _sample_z(oracle, plan, si, k, j)
                ratio = coercivity_ratio(oracle, u, z)
                if ratio is None:
                    skipped += 1
                    continue
                sh_k = min(sh_k, ratio)
                phi = oracle.apply_adjoint(u, z)
                nphi = oracle.norm(phi)
                log_r.append(np.log(r))
                log_ratio.append(np.log(max(ratio, 1e-300)))
                log_phi.append(np.log(max(nphi, 1e-300)))
                if xi is not None:
                    m = xi_margin(oracle, u, z, xi)
                    if m is not None:
                        sh_xi = min(sh_xi, m)
        shells.append(ShellStats(
            radius=r, samples=plan.per_radius, skipped=skipped,
            c_max=sh_c, k_min=float(sh_k if np.isfinite(sh_k) else np.nan),
            xi_margin_min=float(sh_xi if np.isfinite(sh_xi) else np.nan),
            inv_gramian_max=shell_inv[si],
            gap_margin_min=float(sh_gap if np.isfinite(sh_gap) else np.inf),
            singular_found=sing_counts[si]))
        c_est = max(c_est, sh_c)
        k_est = min(k_est, sh_k)
        xi_min = min(xi_min, sh_xi)
        gap_margin = min(gap_margin, sh_gap)
        skipped_total += skipped
        singular_total += sing_counts[si]
    # power-law split fit: slope of log(ratio) gives 1 - alpha, with
    # K1, K2 the worst-case constants at the fitted exponent
    if len(log_r) >= 2 and np.ptp(log_r) > 0:
        slope_ratio = float(np.polyfit(log_r, log_ratio, 1)[0])
    else:
        slope_ratio = 0.0
    alpha = 1.0 + slope_ratio
    lr = np.asarray(log_r)
    k1 = float(np.exp(np.min(np.asarray(log_ratio) + (1.0 - alpha) * lr))) \
        if len(log_r) else 0.0
    k2 = float(np.exp(np.min(np.asarray(log_phi) + (1.0 + alpha) * lr))) \
        if len(log_r) else 0.0
    k_est = float(k_est) if np.isfinite(k_est) else 0.0
    xi_ok = xi is None or (np.isfinite(xi_min) and xi_min >= 1.0)
    gap_val = float(gap_margin) if np.isfinite(gap_margin) else np.inf
    return HypothesisReport(
        plan=plan, lambda0=lambda0, xi=xi, c_est=float(c_est),
        k_est=k_est,
        xi_margin_min=float(xi_min) if np.isfinite(xi_min) else np.nan,
        xi_pass=bool(xi_ok),
        growth_slope=growth_slope, growth_intercept=growth_intercept,
        growth_pass=growth_pass,
        gap_margin=gap_val, gap_pass=bool(gap_val >= 0.0),
        remark_alpha=float(alpha), remark_k1=k1, remark_k2=k2,
        shells=shells, skipped_samples=skipped_total,
        singular_samples=singular_total)
