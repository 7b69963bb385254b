"""Twice-differentiable maps from a weighted coordinate space to R^n.

The domain is R^N carrying a diagonal weighted inner product
``<u, v> = sum_k w_k u_k v_k``, which is the discrete stand-in for an L2
control space when the weights are quadrature weights.  Every adjoint in
this package is taken with respect to that inner product: in coordinates
the adjoint of the Jacobian J is ``W^-1 J^T``, never the bare transpose.
"""

import numpy as np

from .errors import ConfigurationError

# Central finite-difference step scales, relative to 1 + ||u||_X.
FIRST_FD_SCALE = 1e-5
SECOND_FD_SCALE = 1e-4


class MapOracle:
    """Base class for C^2 maps F: (R^N, W) -> R^n.

    Subclasses implement :meth:`eval` and :meth:`jacobian`.  The second
    differential defaults to a central finite difference of the switching
    function ``u -> dF|_u^* z``; maps with a closed-form second
    differential override ``_bilinear_second`` and set
    ``has_analytic_second``.

    Oracles are immutable after construction and safe to share between
    workers.
    """

    has_analytic_second = False

    def __init__(self, dim_domain, dim_codomain, weights=None):
        dim_domain = int(dim_domain)
        dim_codomain = int(dim_codomain)
        if dim_codomain < 1:
            raise ConfigurationError("codomain dimension must be >= 1")
        if dim_codomain > dim_domain:
            raise ConfigurationError(
                f"codomain dimension {dim_codomain} exceeds domain dimension "
                f"{dim_domain}")
        if weights is None:
            weights = np.ones(dim_domain)
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (dim_domain,):
            raise ConfigurationError(
                f"weights must have length {dim_domain}, got {weights.shape}")
        if not np.all(weights > 0):
            raise ConfigurationError("weights must be strictly positive")
        self.dim_domain = dim_domain
        self.dim_codomain = dim_codomain
        self.weights = weights

    # -- weighted geometry -------------------------------------------------

    def inner(self, a, b):
        """Weighted inner product on the domain."""
        return float(np.dot(self.weights * np.asarray(a, float), b))

    def norm(self, a):
        return float(np.sqrt(max(self.inner(a, a), 0.0)))

    # -- dimension checks --------------------------------------------------

    def _domain_vec(self, u, name="u"):
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim_domain,):
            raise ConfigurationError(
                f"{name} must have length {self.dim_domain}, got {u.shape}")
        return u

    def _codomain_vec(self, z, name="z"):
        z = np.asarray(z, dtype=float)
        if z.shape != (self.dim_codomain,):
            raise ConfigurationError(
                f"{name} must have length {self.dim_codomain}, got {z.shape}")
        return z

    # -- primitives to implement --------------------------------------------

    def eval(self, u):
        """F(u) in R^n."""
        raise NotImplementedError

    def jacobian(self, u):
        """Coordinate Jacobian of F at u, shape (n, N)."""
        raise NotImplementedError

    # -- derived operations --------------------------------------------------

    def apply_jacobian(self, u, v):
        """dF|_u applied to a domain direction v."""
        u = self._domain_vec(u)
        v = self._domain_vec(v, "v")
        return self.jacobian(u) @ v

    def apply_adjoint(self, u, z):
        """Switching function dF|_u^* z, i.e. W^-1 J^T z in coordinates."""
        u = self._domain_vec(u)
        z = self._codomain_vec(z)
        return (self.jacobian(u).T @ z) / self.weights

    def adjoint_matrix(self, u):
        """All switching functions at once: column i is dF|_u^* e_i."""
        u = self._domain_vec(u)
        return self.jacobian(u).T / self.weights[:, None]

    def bilinear_second(self, u, z, v, w):
        """z-contracted second differential z^* d2F|_u(v, w).

        Defined as the derivative of the switching function along v,
        paired with w in the weighted inner product.
        """
        u = self._domain_vec(u)
        z = self._codomain_vec(z)
        v = self._domain_vec(v, "v")
        w = self._domain_vec(w, "w")
        if self.has_analytic_second:
            return self._bilinear_second(u, z, v, w)
        dphi = self._switching_derivative(u, z, v)
        return self.inner(dphi, w)

    def bilinear_second_many(self, u, z, v, ws):
        """z^* d2F|_u(v, w) for several w sharing the same direction v.

        For finite-difference oracles this reuses a single pair of
        Jacobian evaluations for all contractions.
        """
        u = self._domain_vec(u)
        z = self._codomain_vec(z)
        v = self._domain_vec(v, "v")
        if self.has_analytic_second:
            return np.array(
                [self._bilinear_second(u, z, v, self._domain_vec(w, "w"))
                 for w in ws])
        dphi = self._switching_derivative(u, z, v)
        return np.array([self.inner(dphi, w) for w in ws])

    def second_operator(self, u, z, v):
        """Domain vector B(v) with <B(v), w>_X = z^* d2F|_u(v, w)."""
        u = self._domain_vec(u)
        z = self._codomain_vec(z)
        v = self._domain_vec(v, "v")
        return self._switching_derivative(u, z, v)

    def _switching_derivative(self, u, z, v):
        """Central FD of the switching function along v."""
        eps = SECOND_FD_SCALE * (1.0 + self.norm(u))
        phi_p = self.apply_adjoint(u + eps * v, z)
        phi_m = self.apply_adjoint(u - eps * v, z)
        return (phi_p - phi_m) / (2.0 * eps)

    def _bilinear_second(self, u, z, v, w):
        raise NotImplementedError

    def fd_jacobian(self, u, eps=None):
        """Central finite-difference Jacobian; validation use only."""
        u = self._domain_vec(u)
        if eps is None:
            eps = FIRST_FD_SCALE * (1.0 + self.norm(u))
        cols = []
        for k in range(self.dim_domain):
            e = np.zeros(self.dim_domain)
            e[k] = eps
            cols.append((self.eval(u + e) - self.eval(u - e)) / (2.0 * eps))
        return np.stack(cols, axis=1)


class LinearMap(MapOracle):
    """F(u) = A u for a dense matrix A; the zero second differential makes
    it the degenerate reference case for every curvature diagnostic."""

    has_analytic_second = True

    def __init__(self, matrix, weights=None):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2:
            raise ConfigurationError("linear map needs a 2-d matrix")
        n, big_n = matrix.shape
        super().__init__(big_n, n, weights)
        self.matrix = matrix

    def eval(self, u):
        return self.matrix @ self._domain_vec(u)

    def jacobian(self, u):
        self._domain_vec(u)
        return self.matrix

    def _bilinear_second(self, u, z, v, w):
        return 0.0


class SphereMap(MapOracle):
    """F(u) = ||u||_X^2 into R^1.

    The origin is the only singular point; shrinking the target value to
    zero drives the lift into it, with every spectral quantity available
    in closed form (G = 4 ||u||^2, h = 2, g = a1 / (2||u||)).
    """

    has_analytic_second = True

    def __init__(self, dim, weights=None):
        super().__init__(dim, 1, weights)

    def eval(self, u):
        u = self._domain_vec(u)
        return np.array([self.inner(u, u)])

    def jacobian(self, u):
        u = self._domain_vec(u)
        return (2.0 * self.weights * u)[None, :]

    def _bilinear_second(self, u, z, v, w):
        return 2.0 * z[0] * self.inner(v, w)


class FoldMap(MapOracle):
    """F(u) = (u1^2, u2): a fold with curvature in the first component only."""

    has_analytic_second = True

    def __init__(self, weights=None):
        super().__init__(2, 2, weights)

    def eval(self, u):
        u = self._domain_vec(u)
        return np.array([u[0] ** 2, u[1]])

    def jacobian(self, u):
        u = self._domain_vec(u)
        return np.array([[2.0 * u[0], 0.0], [0.0, 1.0]])

    def _bilinear_second(self, u, z, v, w):
        return 2.0 * z[0] * v[0] * w[0]


def make_map(name, **params):
    """Build a registered analytic map by name.

    Names: ``linear`` (matrix=..., weights=...), ``sphere`` (dim=...,
    weights=...), ``fold`` (weights=...).  Endpoint maps of control
    systems are built through :mod:`pathlift.endpoint`.
    """
    try:
        builder = _MAP_BUILDERS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown map {name!r}; known: {sorted(_MAP_BUILDERS)}") from None
    return builder(**params)


_MAP_BUILDERS = {
    "linear": LinearMap,
    "sphere": SphereMap,
    "fold": FoldMap,
}

MAP_NAMES = tuple(sorted(_MAP_BUILDERS))
