"""Target paths gamma: [0, 1] -> R^n for the lift to follow."""

import numpy as np

from .errors import ConfigurationError


class TargetPath:
    """Interface: gamma(s), gamma_dot(s), gamma_ddot(s) on [0, 1].

    ``knots`` lists interior parameters where smoothness breaks; the
    solver restarts its diagnostics there.
    """

    dim = None
    knots = ()

    def gamma(self, s):
        raise NotImplementedError

    def gamma_dot(self, s):
        raise NotImplementedError

    def gamma_ddot(self, s):
        raise NotImplementedError

    def max_speed(self, samples=201):
        grid = np.linspace(0.0, 1.0, samples)
        return max(float(np.linalg.norm(self.gamma_dot(s))) for s in grid)


class LinePath(TargetPath):
    """Straight segment from start to end."""

    def __init__(self, start, end):
        self.start = np.asarray(start, dtype=float)
        self.end = np.asarray(end, dtype=float)
        if self.start.shape != self.end.shape or self.start.ndim != 1:
            raise ConfigurationError("line endpoints must be 1-d and match")
        self.dim = len(self.start)

    def gamma(self, s):
        return (1.0 - s) * self.start + s * self.end

    def gamma_dot(self, s):
        return self.end - self.start

    def gamma_ddot(self, s):
        return np.zeros(self.dim)


class PolylinePath(TargetPath):
    """Piecewise-linear path through waypoints, uniform in s per segment.

    C^2 smoothness is broken at the knots; they are exposed so the lift
    can restart eigenvector alignment and coefficient tracking there.
    """

    def __init__(self, waypoints):
        pts = np.asarray(waypoints, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2:
            raise ConfigurationError("polyline needs >= 2 waypoints")
        self.points = pts
        self.dim = pts.shape[1]
        self.nseg = pts.shape[0] - 1
        self.knots = tuple(k / self.nseg for k in range(1, self.nseg))

    def _segment(self, s):
        # right-continuous segment choice so gamma_dot(knot) is the
        # incoming slope of the next segment
        k = min(int(np.floor(s * self.nseg)), self.nseg - 1)
        return k, s * self.nseg - k

    def gamma(self, s):
        k, t = self._segment(s)
        return (1.0 - t) * self.points[k] + t * self.points[k + 1]

    def gamma_dot(self, s):
        k, _ = self._segment(s)
        return (self.points[k + 1] - self.points[k]) * self.nseg

    def gamma_ddot(self, s):
        return np.zeros(self.dim)


class AnalyticPath(TargetPath):
    """Wrap user callables for gamma and its first two derivatives."""

    def __init__(self, gamma, gamma_dot, gamma_ddot, dim):
        self._gamma = gamma
        self._gamma_dot = gamma_dot
        self._gamma_ddot = gamma_ddot
        self.dim = int(dim)

    def gamma(self, s):
        return np.asarray(self._gamma(s), dtype=float)

    def gamma_dot(self, s):
        return np.asarray(self._gamma_dot(s), dtype=float)

    def gamma_ddot(self, s):
        return np.asarray(self._gamma_ddot(s), dtype=float)


def line_to_target(oracle, u0, target):
    """Default path: straight line from F(u0) to the target point."""
    start = oracle.eval(np.asarray(u0, dtype=float))
    target = np.asarray(target, dtype=float)
    if target.shape != start.shape:
        raise ConfigurationError(
            f"target must have length {len(start)}, got {target.shape}")
    return LinePath(start, target)
