"""Integration of the path-lifting equation du/ds = dF^* G^-1 gamma_dot.

The lift follows a target path gamma(s) from s=0 to s=1 with an embedded
Cash-Karp 5(4) pair, Gauss-Newton residual correction after each
accepted step, and bisection toward the singular set when the least
Gramian eigenvalue collapses.  Every accepted state carries the full
spectral diagnostics, so a finished run doubles as an empirical record
of the quantities the solver's termination analysis is built on.
"""

import logging
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import (BadAnchor, NumericalError, SingularGramian,
                     SingularStart)
from .spectrum import (GramianSpectrum, SpectralDiagnostics, diagnostics,
                       gramian, spectral_decompose)

log = logging.getLogger(__name__)

# Termination statuses of a continuation run.
REACHED = "Reached"
SINGULAR_TERMINAL = "SingularTerminal"
SINGULAR_INTERIOR = "SingularInterior"
STEP_UNDERFLOW = "StepUnderflow"
DIVERGED = "Diverged"


@dataclass
class SolverOptions:
    ds_init: float = 1e-2
    ds_min: float = 1e-12
    ds_event: float = 1e-6       # bisection resolution toward the singular set
    tol_ode: float = 1e-8        # relative local error tolerance
    tol_ode_abs: float = 1e-10
    tol_residual: float = 1e-10
    tol_init: float = 1e-6
    correction: bool = True
    terminal_window: float = 1e-3
    max_steps: int = 200_000


@dataclass
class LiftState:
    """Accepted solver state at parameter s."""

    s: float
    u: np.ndarray
    spectrum: GramianSpectrum
    diag: SpectralDiagnostics
    residual: float
    step_size: float
    udot_norm: float
    flags: str = ""


@dataclass
class ContinuationReport:
    trace: list
    status: str
    final_u: np.ndarray
    final_residual: float
    g_integral: float
    u_norm_variation: float
    bound_check_max: float
    lambda0_measured: float
    max_gamma_dot: float
    message: str = ""

    @property
    def final_state(self):
        return self.trace[-1]


# Cash-Karp 5(4) tableau: six stages, fifth-order propagation.
_CK_C = np.array([0.0, 1 / 5, 3 / 10, 3 / 5, 1.0, 7 / 8])
_CK_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [3 / 10, -9 / 10, 6 / 5],
    [-11 / 54, 5 / 2, -70 / 27, 35 / 27],
    [1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096],
]
_CK_B5 = np.array([37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771])
_CK_B4 = np.array([2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296,
                   277 / 14336, 1 / 4])


def _solve_gramian(spec, rhs_vec, clamp=False):
    """Solve G c = rhs through the eigendecomposition.

    With ``clamp`` the eigenvalues are floored at the singular threshold,
    the graceful-degradation route used near the singular set.
    """
    lam = spec.lambdas
    if clamp:
        lam = np.maximum(lam, spec.lambda_sing)
    return spec.vectors @ ((spec.vectors.T @ rhs_vec) / lam)


def ple_rhs(oracle, u, gamma_dot):
    """Right-hand side dF|_u^* G(u)^-1 gamma_dot of the lifting equation.

    The Gramian solve goes through Cholesky and falls back to a clamped
    eigendecomposition when roundoff makes the factorization fail.
    Raises SingularGramian when lambda_1 is at or below the singular
    threshold.
    """
    u = np.asarray(u, dtype=float)
    gmat = gramian(oracle, u)
    spec = spectral_decompose(gmat)
    if spec.lambdas[0] <= spec.lambda_sing:
        raise SingularGramian(
            f"Gramian singular: lambda_1 = {spec.lambdas[0]:.3e}",
            spectrum=spec)
    try:
        chol = np.linalg.cholesky(gmat)
        c = np.linalg.solve(chol.T, np.linalg.solve(chol, gamma_dot))
    except np.linalg.LinAlgError:
        c = _solve_gramian(spec, gamma_dot, clamp=True)
    return oracle.apply_adjoint(u, c)


def _rhs_from_spectrum(oracle, u, gamma_dot, spec, clamp=False):
    c = _solve_gramian(spec, np.asarray(gamma_dot, float), clamp=clamp)
    return oracle.apply_adjoint(u, c)


def _ck_step(fun, s, u, h):
    """One Cash-Karp step; returns the fifth-order solution and the
    embedded error estimate."""
    ks = []
    for i in range(6):
        ui = u
        for aij, kj in zip(_CK_A[i], ks):
            ui = ui + (h * aij) * kj
        ks.append(fun(s + _CK_C[i] * h, ui))
    kmat = np.stack(ks, axis=0)
    u5 = u + h * (_CK_B5 @ kmat)
    err = h * ((_CK_B5 - _CK_B4) @ kmat)
    return u5, err


def _error_ratio(u, u5, err, opts):
    scale = opts.tol_ode_abs + opts.tol_ode * np.maximum(np.abs(u),
                                                         np.abs(u5))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def gauss_newton_correct(oracle, u, target, tol_residual, max_iter=10):
    """Project u back onto the fiber F(u) = target.

    Returns (u, residual, converged).  Each iteration applies the
    least-norm update dF^* G^-1 (target - F(u)).
    """
    u = np.asarray(u, dtype=float)
    res = float(np.linalg.norm(oracle.eval(u) - target))
    for _ in range(max_iter):
        if res <= tol_residual:
            return u, res, True
        spec = spectral_decompose(gramian(oracle, u))
        r = target - oracle.eval(u)
        u_try = u + _rhs_from_spectrum(oracle, u, r, spec, clamp=True)
        res_try = float(np.linalg.norm(oracle.eval(u_try) - target))
        if not np.isfinite(res_try) or res_try >= res:
            break
        u, res = u_try, res_try
    return u, res, res <= tol_residual


def _make_state(oracle, path, s, u, spec, h_used, flags=""):
    gd = path.gamma_dot(s)
    diag = diagnostics(oracle, u, spec, gd)
    residual = float(np.linalg.norm(oracle.eval(u) - path.gamma(s)))
    if spec.singular:
        udot_norm = np.nan
    else:
        udot = _rhs_from_spectrum(oracle, u, gd, spec)
        udot_norm = oracle.norm(udot)
    return LiftState(s=float(s), u=u, spectrum=spec, diag=diag,
                     residual=residual, step_size=float(h_used),
                     udot_norm=udot_norm, flags=flags)


def step(oracle, path, state, options=None):
    """Advance one accepted, error-controlled step from a LiftState.

    Convenience wrapper around the same embedded pair the full lift
    uses; no singularity-event handling.
    """
    opts = options or SolverOptions()

    def fun(ss, uu):
        return ple_rhs(oracle, uu, path.gamma_dot(ss))

    h = min(state.step_size if state.step_size > 0 else opts.ds_init,
            1.0 - state.s)
    while True:
        u5, err = _ck_step(fun, state.s, state.u, h)
        ratio = _error_ratio(state.u, u5, err, opts)
        if ratio <= 1.0:
            break
        h = max(h * max(0.2, 0.9 * ratio ** -0.25), opts.ds_min)
        if h <= opts.ds_min:
            break
    s_new = state.s + h
    u_new = u5
    if opts.correction:
        u_new, _, _ = gauss_newton_correct(oracle, u_new, path.gamma(s_new),
                                           opts.tol_residual)
    spec = spectral_decompose(gramian(oracle, u_new), prev=state.spectrum)
    return _make_state(oracle, path, s_new, u_new, spec, h)


def correct(oracle, state, path, options=None):
    """Residual-corrected copy of a LiftState at the same s."""
    opts = options or SolverOptions()
    u_new, res, ok = gauss_newton_correct(oracle, state.u,
                                          path.gamma(state.s),
                                          opts.tol_residual)
    if np.allclose(u_new, state.u) and res == state.residual:
        return state
    spec = spectral_decompose(gramian(oracle, u_new), prev=state.spectrum)
    new_state = _make_state(oracle, path, state.s, u_new, spec,
                            state.step_size, flags=state.flags)
    if not ok:
        new_state = replace(new_state,
                            flags=(new_state.flags + " corr-fail").strip())
    return new_state


class _Lift:
    """Single sequential continuation run."""

    def __init__(self, oracle, path, u0, opts):
        self.oracle = oracle
        self.path = path
        self.opts = opts
        self.u = np.asarray(u0, dtype=float)
        self.s = 0.0
        self.prev_spec = None
        self.trace = []
        self.status = None
        self.message = ""
        self.boundaries = sorted(set(path.knots)) + [1.0]

    def _fun(self, ss, uu):
        return ple_rhs(self.oracle, uu, self.path.gamma_dot(ss))

    def _next_boundary(self):
        for b in self.boundaries:
            if b > self.s + 1e-14:
                return b
        return 1.0

    def _log(self, s, u, spec, h_used, flags=""):
        state = _make_state(self.oracle, self.path, s, u, spec, h_used,
                            flags)
        self.trace.append(state)
        self.prev_spec = spec
        self.s = s
        self.u = u
        return state

    def _accept_regular(self, s_new, u_new, h_used, at_knot):
        opts = self.opts
        flags = []
        if opts.correction:
            u_new, res, ok = gauss_newton_correct(
                self.oracle, u_new, self.path.gamma(s_new),
                opts.tol_residual)
            if not ok:
                if res < 10.0 * opts.tol_residual:
                    warnings.warn(
                        f"residual correction stalled at {res:.3e} "
                        f"(s = {s_new:.6f}); continuing", RuntimeWarning)
                    flags.append("corr-warn")
                else:
                    self.status = DIVERGED
                    self.message = (f"correction failed: residual {res:.3e} "
                                    f"at s = {s_new:.6f}")
                    spec = spectral_decompose(gramian(self.oracle, u_new),
                                              prev=self.prev_spec)
                    self._log(s_new, u_new, spec, h_used, "corr-fail")
                    return None
        spec = spectral_decompose(gramian(self.oracle, u_new),
                                  prev=self.prev_spec)
        if at_knot:
            flags.append("knot")
        state = self._log(s_new, u_new, spec, h_used, " ".join(flags))
        if at_knot and s_new < 1.0 - 1e-14:
            # restart eigenvector alignment and coefficient tracking
            self.prev_spec = None
        return state

    def _finish_singular(self, s_new, u_new, spec, h_used):
        self._log(s_new, u_new, spec, h_used, "singular")
        if s_new >= 1.0 - self.opts.terminal_window:
            self.status = SINGULAR_TERMINAL
        else:
            self.status = SINGULAR_INTERIOR
        log.info("singular set reached at s = %.9f (lambda_1 = %.3e)",
                 s_new, spec.lambdas[0])

    def _approach_singularity(self, h_start, require=True):
        """Euler steps with a clamped Gramian solve to land just past the
        point where lambda_1 crosses the singular threshold.

        With ``require`` False the walk gives up silently when lambda_1
        stops shrinking (the state was regular after all); otherwise the
        failure to cross is reported as step underflow.
        """
        opts = self.opts
        h = max(h_start, opts.ds_min)
        for _ in range(300):
            h_use = min(h, 1.0 - self.s)
            spec_here = self.prev_spec
            if h_use > 1e-15:
                gd = self.path.gamma_dot(self.s)
                udot = _rhs_from_spectrum(self.oracle, self.u, gd,
                                          spec_here, clamp=True)
                u_try = self.u + h_use * udot
                s_try = self.s + h_use
            else:
                # s pinned at a boundary: contract toward the target in u
                # alone with the clamped least-norm correction
                r = self.path.gamma(self.s) - self.oracle.eval(self.u)
                u_try = self.u + _rhs_from_spectrum(self.oracle, self.u, r,
                                                    spec_here, clamp=True)
                s_try = self.s
            spec_try = spectral_decompose(gramian(self.oracle, u_try),
                                          prev=self.prev_spec)
            if spec_try.singular:
                self._finish_singular(s_try, u_try, spec_try, h_use)
                return
            if spec_try.lambdas[0] < spec_here.lambdas[0]:
                self._log(s_try, u_try, spec_try, h_use, "approach")
                if spec_try.lambdas[0] > 0.5 * spec_here.lambdas[0]:
                    h = h * 2.0
            elif h_use <= 1e-15:
                # pinned contraction stalled: the state is regular
                if require:
                    break
                return
            else:
                h = h * 2.0
            if h > opts.ds_event:
                h = opts.ds_event
        if require:
            self.status = STEP_UNDERFLOW
            self.message = "could not cross the singular threshold"

    def run(self):
        opts = self.opts
        spec0 = spectral_decompose(gramian(self.oracle, self.u))
        self._log(0.0, self.u, spec0, 0.0, "start")
        h = opts.ds_init
        steps = 0
        while self.s < 1.0 - 1e-15 and self.status is None:
            steps += 1
            if steps > opts.max_steps:
                self.status = STEP_UNDERFLOW
                self.message = f"step budget {opts.max_steps} exhausted"
                break
            boundary = self._next_boundary()
            h = min(h, boundary - self.s)
            if h < opts.ds_min:
                self.status = STEP_UNDERFLOW
                self.message = f"step size {h:.3e} below ds_min"
                break
            try:
                u5, err = _ck_step(self._fun, self.s, self.u, h)
            except SingularGramian:
                if h <= max(opts.ds_event, 4.0 * opts.ds_min):
                    self._approach_singularity(h)
                    break
                h *= 0.5
                continue
            if not np.all(np.isfinite(u5)):
                h *= 0.5
                if h < opts.ds_min:
                    self.status = DIVERGED
                    self.message = "non-finite state produced"
                    break
                continue
            ratio = _error_ratio(self.u, u5, err, opts)
            if ratio > 1.0:
                h = h * max(0.2, 0.9 * ratio ** -0.25)
                continue
            spec_new = spectral_decompose(gramian(self.oracle, u5),
                                          prev=self.prev_spec)
            if spec_new.singular:
                if h <= max(opts.ds_event, 4.0 * opts.ds_min):
                    self._finish_singular(self.s + h, u5, spec_new, h)
                    break
                h *= 0.5
                continue
            s_new = self.s + h
            at_knot = abs(s_new - boundary) < 1e-14 and boundary < 1.0
            if self._accept_regular(s_new, u5, h, at_knot) is None:
                break
            if ratio > 0.0:
                h = h * min(5.0, max(0.2, 0.9 * ratio ** -0.2))
            else:
                h = h * 5.0
        if self.status is None:
            near = self.trace[-1].spectrum
            if near.lambdas[0] < 1e4 * near.lambda_sing:
                # finished barely above the singular threshold; resolve by
                # contracting toward the target at fixed s
                self._approach_singularity(opts.ds_min, require=False)
        if self.status is None:
            final = self.trace[-1]
            if final.residual <= opts.tol_residual:
                self.status = REACHED
            elif not opts.correction:
                self.status = REACHED
                self.message = (f"drift {final.residual:.3e} at s = 1 "
                                "(correction disabled)")
            else:
                self.status = DIVERGED
                self.message = f"final residual {final.residual:.3e}"
        return self._report()

    def _report(self):
        trace = self.trace
        final = trace[-1]
        n = self.oracle.dim_codomain
        # trapezoid of |g| over states where g is defined
        pts = [(st.s, abs(st.diag.g)) for st in trace
               if np.isfinite(st.diag.g)]
        g_integral = 0.0
        for (s0, g0), (s1, g1) in zip(pts, pts[1:]):
            g_integral += 0.5 * (g0 + g1) * (s1 - s0)
        norms = [self.oracle.norm(st.u) for st in trace]
        variation = float(np.sum(np.abs(np.diff(norms)))) if len(norms) > 1 \
            else 0.0
        if n > 1:
            lam0 = min(float(np.min(st.spectrum.lambdas[1:]))
                       for st in trace)
        else:
            lam0 = np.inf
        max_speed = self.path.max_speed()
        cbar = (n - 1) * max_speed / np.sqrt(lam0) if n > 1 else 0.0
        bound_max = -np.inf
        for st in trace:
            if not np.isfinite(st.udot_norm) or st.spectrum.singular:
                continue
            lhs = st.udot_norm
            rhs = (abs(st.diag.a[0]) / np.sqrt(st.spectrum.lambdas[0])
                   + cbar)
            bound_max = max(bound_max, lhs - rhs)
        return ContinuationReport(
            trace=trace, status=self.status, final_u=final.u,
            final_residual=final.residual, g_integral=g_integral,
            u_norm_variation=variation, bound_check_max=float(bound_max),
            lambda0_measured=float(lam0), max_gamma_dot=float(max_speed),
            message=self.message)


def lift(oracle, path, u0, options=None):
    """Lift the target path through the map, from anchor u0.

    Preconditions: F(u0) must match gamma(0) within tol_init (else
    BadAnchor) and u0 must be nonsingular (else SingularStart).  Returns
    a ContinuationReport whose trace holds every accepted state.
    """
    opts = options or SolverOptions()
    u0 = oracle._domain_vec(np.asarray(u0, dtype=float), "u0")
    res0 = float(np.linalg.norm(oracle.eval(u0) - path.gamma(0.0)))
    if res0 > opts.tol_init:
        raise BadAnchor(
            f"initial residual {res0:.3e} exceeds tol_init {opts.tol_init:.1e}")
    spec0 = spectral_decompose(gramian(oracle, u0))
    if spec0.singular:
        raise SingularStart(
            f"anchor is singular: lambda_1 = {spec0.lambdas[0]:.3e}")
    return _Lift(oracle, path, u0, opts).run()


# -- finite differences along the integrated lift --------------------------

def _rk4_flow(oracle, path, s, u, ds, nsub=2):
    """Short classical RK4 flow of the lifting equation from (s, u)."""
    h = ds / nsub
    for _ in range(nsub):
        k1 = ple_rhs(oracle, u, path.gamma_dot(s))
        k2 = ple_rhs(oracle, u + 0.5 * h * k1, path.gamma_dot(s + 0.5 * h))
        k3 = ple_rhs(oracle, u + 0.5 * h * k2, path.gamma_dot(s + 0.5 * h))
        k4 = ple_rhs(oracle, u + h * k3, path.gamma_dot(s + h))
        u = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        s = s + h
    return u


def fd_along_lift(oracle, path, state, quantity, delta=1e-3):
    """Central difference of a spectral quantity along the lift.

    ``quantity(s, u, spec)`` receives a spectrum sign-aligned with the
    base state.  Used as the independent check of the eigenvalue- and
    eigenvector-derivative formulas.
    """
    def evaluate(ss, uu):
        spec = spectral_decompose(gramian(oracle, uu), prev=state.spectrum)
        return quantity(ss, uu, spec)

    u_p = _rk4_flow(oracle, path, state.s, state.u, delta)
    u_m = _rk4_flow(oracle, path, state.s, state.u, -delta)
    qp = evaluate(state.s + delta, u_p)
    qm = evaluate(state.s - delta, u_m)
    return (np.asarray(qp) - np.asarray(qm)) / (2.0 * delta)


def lambda1_fd_along_lift(oracle, path, state, delta=1e-3):
    """Finite-difference d(lambda_1)/ds along the integrated lift."""
    return float(fd_along_lift(oracle, path, state,
                               lambda s, u, spec: spec.lambdas[0], delta))
