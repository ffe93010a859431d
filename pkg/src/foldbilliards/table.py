"""Billiard tables, boundary frames and the reflection law.

A table is the region K = {f >= 0} of the hyperplane H, studied inside a
coordinate patch U (a metric ball plus optional polynomial constraints).
All inner products below use the induced metric g of the ambient model on H,
so the same code serves the Euclidean, hyperbolic and spherical cases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ambient
from .ambient import AmbientModel
from .errors import (
    ConfigError,
    DegenerateBoundaryError,
    InvalidInputError,
    NumericError,
    PreconditionError,
)

# |f(x)| below this counts as "on the boundary".
ON_BOUNDARY_TOL = 1e-8
# |Df| below this is a degenerate boundary point.
DEGENERATE_GRAD_TOL = 1e-10
# Default slack for the polarity tests.
POLAR_TOL = 1e-9
# Tangent vectors with normal component >= -CONE_TOL count as cone members.
CONE_TOL = 1e-10


class Shape:
    """Defining function f of a table, with analytic derivatives."""

    def f(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def grad(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hess(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def f_many(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.f(x) for x in np.atleast_2d(X)])


@dataclass(frozen=True)
class DiskShape(Shape):
    """f(x) = 1 - |x|^2, the closed unit ball of H."""

    def f(self, x):
        return 1.0 - float(x @ x)

    def grad(self, x):
        return -2.0 * np.asarray(x, dtype=float)

    def hess(self, x):
        return -2.0 * np.eye(len(x))

    def f_many(self, X):
        X = np.atleast_2d(X)
        return 1.0 - np.einsum("ni,ni->n", X, X)


@dataclass(frozen=True)
class HalfSpaceShape(Shape):
    """f(x) = x_1."""

    def f(self, x):
        return float(x[0])

    def grad(self, x):
        g = np.zeros(len(x))
        g[0] = 1.0
        return g

    def hess(self, x):
        return np.zeros((len(x), len(x)))

    def f_many(self, X):
        return np.atleast_2d(X)[:, 0].astype(float)


@dataclass(frozen=True)
class ParabolaComplementShape(Shape):
    """f(x) = x_1^2 - x_2, the complement of an open parabolic region."""

    def f(self, x):
        return float(x[0] * x[0] - x[1])

    def grad(self, x):
        g = np.zeros(len(x))
        g[0] = 2.0 * x[0]
        g[1] = -1.0
        return g

    def hess(self, x):
        h = np.zeros((len(x), len(x)))
        h[0, 0] = 2.0
        return h

    def f_many(self, X):
        X = np.atleast_2d(X)
        return X[:, 0] ** 2 - X[:, 1]


@dataclass(frozen=True)
class PolynomialShape(Shape):
    """f as a finite sum of monomials: terms ((e_1, ..., e_n), coeff)."""

    terms: tuple[tuple[tuple[int, ...], float], ...]

    def f(self, x):
        return float(sum(c * np.prod(np.asarray(x, dtype=float) ** np.array(e))
                         for e, c in self.terms))

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(len(x))
        for e, c in self.terms:
            for i, ei in enumerate(e):
                if ei == 0:
                    continue
                mono = c * ei
                for j, ej in enumerate(e):
                    p = ej - 1 if j == i else ej
                    mono *= x[j] ** p
                out[i] += mono
        return out

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        n = len(x)
        out = np.zeros((n, n))
        for e, c in self.terms:
            for i in range(n):
                for j in range(n):
                    ei = e[i] - (1 if i == j else 0)
                    if e[i] == 0 or (i == j and e[i] < 2) or e[j] == 0:
                        continue
                    factor = c * e[i] * (e[i] - 1 if i == j else e[j])
                    mono = factor
                    for k, ek in enumerate(e):
                        p = ek
                        if k == i:
                            p -= 1
                        if k == j:
                            p -= 1
                        mono *= x[k] ** p
                    out[i, j] += mono
        return out

    def f_many(self, X):
        X = np.atleast_2d(X)
        out = np.zeros(X.shape[0])
        for e, c in self.terms:
            out += c * np.prod(X ** np.array(e)[None, :], axis=1)
        return out


@dataclass(frozen=True)
class FiniteDifferenceShape(Shape):
    """Wraps a bare f callable; derivatives by central differences.

    Fallback for exotic defining functions.  step = 1e-5 keeps the
    second-derivative truncation and roundoff balanced near 1e-6.
    """

    fn: object
    step: float = 1e-5

    def f(self, x):
        return float(self.fn(np.asarray(x, dtype=float)))

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(len(x))
        for i in range(len(x)):
            e = np.zeros(len(x))
            e[i] = self.step
            out[i] = (self.f(x + e) - self.f(x - e)) / (2 * self.step)
        return out

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        n = len(x)
        out = np.zeros((n, n))
        f0 = self.f(x)
        h = self.step
        for i in range(n):
            ei = np.zeros(n)
            ei[i] = h
            out[i, i] = (self.f(x + ei) - 2 * f0 + self.f(x - ei)) / h**2
            for j in range(i + 1, n):
                ej = np.zeros(n)
                ej[j] = h
                val = (self.f(x + ei + ej) - self.f(x + ei - ej)
                       - self.f(x - ei + ej) + self.f(x - ei - ej)) / (4 * h**2)
                out[i, j] = out[j, i] = val
        return out


@dataclass(frozen=True)
class Region:
    """Coordinate patch U: metric ball around center intersected with
    polynomial strip constraints lo < p(x) < hi."""

    center: tuple[float, ...]
    radius: float
    constraints: tuple[tuple[PolynomialShape, float, float], ...] = ()

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if np.linalg.norm(x - np.asarray(self.center)) >= self.radius:
            return False
        return all(lo < poly.f(x) < hi for poly, lo, hi in self.constraints)

    def contains_many(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        ok = np.linalg.norm(X - np.asarray(self.center)[None], axis=1) < self.radius
        for poly, lo, hi in self.constraints:
            vals = poly.f_many(X)
            ok &= (vals > lo) & (vals < hi)
        return ok


@dataclass(frozen=True)
class TableSpec:
    """A billiard table K = {f >= 0} with base point p0 on its boundary."""

    n: int
    shape: Shape
    region: Region
    p0: tuple[float, ...]
    name: str = "table"

    def __post_init__(self):
        p0 = np.asarray(self.p0, dtype=float)
        if p0.shape != (self.n,):
            raise InvalidInputError("p0 has wrong dimension")
        if abs(self.shape.f(p0)) > ON_BOUNDARY_TOL:
            raise InvalidInputError("p0 must lie on the boundary {f = 0}")
        if np.linalg.norm(self.shape.grad(p0)) < DEGENERATE_GRAD_TOL:
            raise InvalidInputError("boundary is degenerate at p0")
        if not self.region.contains(p0):
            raise InvalidInputError("p0 must lie inside the patch U")

    @property
    def p0_array(self) -> np.ndarray:
        return np.asarray(self.p0, dtype=float)

    def f(self, x) -> float:
        return self.shape.f(np.asarray(x, dtype=float))

    def grad_f(self, x) -> np.ndarray:
        return self.shape.grad(np.asarray(x, dtype=float))

    def hess_f(self, x) -> np.ndarray:
        return self.shape.hess(np.asarray(x, dtype=float))

    def f_many(self, X) -> np.ndarray:
        return self.shape.f_many(np.asarray(X, dtype=float))


def disk_table(n: int = 2, radius_U: float = 2.5) -> TableSpec:
    p0 = tuple([1.0] + [0.0] * (n - 1))
    return TableSpec(n=n, shape=DiskShape(), name="disk",
                     region=Region(center=(0.0,) * n, radius=radius_U), p0=p0)


def half_space_table(n: int = 2, radius_U: float = 5.0) -> TableSpec:
    return TableSpec(n=n, shape=HalfSpaceShape(), name="half-space",
                     region=Region(center=(0.0,) * n, radius=radius_U),
                     p0=(0.0,) * n)


def parabola_table(n: int = 2, radius_U: float = 1.2) -> TableSpec:
    return TableSpec(n=n, shape=ParabolaComplementShape(), name="parabola",
                     region=Region(center=(0.0,) * n, radius=radius_U),
                     p0=(0.0,) * n)


def spherical_halfspace_table(n: int = 3) -> TableSpec:
    """Half-space table on the patch where its spherical fold has curvature
    bounded below: U = {-3/2 < 3 x_1^2 - 1 - x_2^2 - ... - x_n^2 < 0} n B(0,1)."""
    exps = []
    for i in range(n):
        e = [0] * n
        e[i] = 2
        exps.append((tuple(e), 3.0 if i == 0 else -1.0))
    exps.append(((0,) * n, -1.0))
    strip = PolynomialShape(terms=tuple(exps))
    return TableSpec(
        n=n, shape=HalfSpaceShape(), name="half-space",
        region=Region(center=(0.0,) * n, radius=1.0,
                      constraints=((strip, -1.5, 0.0),)),
        p0=(0.0,) * n)


BUILTIN_TABLES = {
    "disk": disk_table,
    "half-space": half_space_table,
    "parabola": parabola_table,
}


@dataclass
class BoundaryFrame:
    """Inward unit normal and g-orthonormal tangent basis at a boundary point."""

    x0: np.ndarray
    nu: np.ndarray
    tangent_basis: np.ndarray  # shape (n-1, n)
    metric: ambient.MetricAt


def model_on_table(table: TableSpec, model: AmbientModel) -> AmbientModel:
    """The model of (H, g).  Accepts the ambient model or the one on H."""
    if model.dim == table.n:
        return model
    if model.dim == table.n + 1:
        return model.restricted()
    raise InvalidInputError(
        f"model dimension {model.dim} matches neither the table ({table.n}) "
        f"nor its ambient space ({table.n + 1})")


def boundary_frame(table: TableSpec, model: AmbientModel, x0) -> BoundaryFrame:
    """Frame of the boundary {f = 0} at x0 in the induced metric g on H.

    The inward normal is g^{-1} Df / |g^{-1} Df|_g; the tangent basis comes
    from Gram-Schmidt (in g) over coordinate seeds, so it is deterministic.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (table.n,):
        raise InvalidInputError("x0 has wrong dimension")
    if abs(table.f(x0)) > ON_BOUNDARY_TOL:
        raise PreconditionError("x0 is not on the boundary {f = 0}")
    if not table.region.contains(x0):
        raise PreconditionError("x0 lies outside the patch U")
    df = table.grad_f(x0)
    if np.linalg.norm(df) < DEGENERATE_GRAD_TOL:
        raise DegenerateBoundaryError("boundary gradient vanishes at x0")
    metric = ambient.metric_tensor(model_on_table(table, model), x0)
    nu = metric.g_inv @ df
    nu = nu / np.sqrt(nu @ metric.g @ nu)

    basis = []
    # seeds ordered by increasing alignment with the normal direction
    order = np.argsort(np.abs(df) / np.linalg.norm(df))
    for idx in order:
        v = np.zeros(table.n)
        v[idx] = 1.0
        v = v - (v @ metric.g @ nu) * nu
        for b in basis:
            v = v - (v @ metric.g @ b) * b
        nrm = np.sqrt(max(v @ metric.g @ v, 0.0))
        if nrm < 1e-10:
            continue
        basis.append(v / nrm)
        if len(basis) == table.n - 1:
            break
    if len(basis) != table.n - 1:
        raise DegenerateBoundaryError("could not build a tangent basis")
    return BoundaryFrame(x0=x0, nu=nu, tangent_basis=np.array(basis), metric=metric)


def _check_unit_cone(frame: BoundaryFrame, v: np.ndarray, label: str) -> None:
    g = frame.metric.g
    if abs(v @ g @ v - 1.0) > 1e-8:
        raise PreconditionError(f"{label} is not a unit vector in g")
    if v @ g @ frame.nu < -CONE_TOL:
        raise PreconditionError(f"{label} is not in the tangent cone")


def is_polar(frame: BoundaryFrame, u, v, tol: float = POLAR_TOL) -> bool:
    """Whether unit cone vectors u, v form a polar pair at the frame point.

    Runs both equivalent tests and insists they agree:
      (a) g(u + v, w) >= -tol for w in the generating set {+-t_i, nu};
      (b) u + v = s nu with s >= -tol and tangential remainder below tol.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_unit_cone(frame, u, "u")
    _check_unit_cone(frame, v, "v")
    g = frame.metric.g
    s = u + v
    test_a = (s @ g @ frame.nu) >= -tol
    for t in frame.tangent_basis:
        val = s @ g @ t
        test_a = test_a and (val >= -tol) and (-val >= -tol)
    r = s @ g @ frame.nu
    tangential = s - r * frame.nu
    test_b = (r >= -tol) and np.sqrt(max(tangential @ g @ tangential, 0.0)) <= tol
    if test_a != test_b:
        raise NumericError(
            f"polarity tests disagree for u={u}, v={v}: "
            f"generating-set={test_a}, normal-decomposition={test_b}")
    return bool(test_a)


def polar_vector(frame: BoundaryFrame, u) -> np.ndarray:
    """The unique polar partner: u = u_tan + r nu maps to -u_tan + r nu."""
    u = np.asarray(u, dtype=float)
    _check_unit_cone(frame, u, "u")
    g = frame.metric.g
    r = u @ g @ frame.nu
    return 2.0 * r * frame.nu - u


def reflect(frame: BoundaryFrame, w_in) -> np.ndarray:
    """Mirror law for an incoming unit velocity: w - 2 g(w, nu) nu.

    Incoming means the normal component g(w_in, nu) is <= 1e-10; an outgoing
    vector is a precondition error.  Grazing vectors reflect to themselves.
    """
    w_in = np.asarray(w_in, dtype=float)
    g = frame.metric.g
    if abs(w_in @ g @ w_in - 1.0) > 1e-8:
        raise PreconditionError("w_in is not a unit vector in g")
    r = w_in @ g @ frame.nu
    if r > 1e-10:
        raise PreconditionError("w_in points into the table; not an incoming velocity")
    return w_in - 2.0 * r * frame.nu


def sample_boundary_points(table: TableSpec, model: AmbientModel, k: int,
                           seed: int = 0, max_tries: int = 2000) -> np.ndarray:
    """k boundary points found by bisecting f along random rays inside U."""
    rng = np.random.default_rng(seed)
    anchor = _interior_anchor(table, model)
    pts = []
    tries = 0
    while len(pts) < k and tries < max_tries:
        tries += 1
        d = rng.normal(size=table.n)
        d /= np.linalg.norm(d)
        # march until f goes negative or the patch is left
        lo, hi = 0.0, None
        t = 0.05
        while t < 2.0 * table.region.radius:
            x = anchor + t * d
            if not table.region.contains(x):
                break
            if table.f(x) < 0:
                hi = t
                break
            lo = t
            t += 0.05
        if hi is None:
            continue
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if table.f(anchor + mid * d) < 0:
                hi = mid
            else:
                lo = mid
        x0 = anchor + 0.5 * (lo + hi) * d
        if abs(table.f(x0)) > ON_BOUNDARY_TOL:
            continue
        if np.linalg.norm(table.grad_f(x0)) < 1e-6:
            continue
        pts.append(x0)
    if len(pts) < k:
        raise ConfigError(f"found only {len(pts)} boundary points after {tries} tries")
    return np.array(pts)


def _interior_anchor(table: TableSpec, model: AmbientModel) -> np.ndarray:
    """A point with f > 0 inside U, found by stepping inward from p0."""
    frame = boundary_frame(table, model, table.p0_array)
    for step in (0.3, 0.1, 0.03, 0.01):
        x = table.p0_array + step * frame.nu
        if table.region.contains(x) and table.f(x) > 0:
            return x
    raise ConfigError("no interior anchor found near p0")


def reflection_iff_polar_check(table: TableSpec, model: AmbientModel,
                               n_samples: int, seed: int = 0,
                               perturbation: float = 1e-3) -> dict:
    """Property check: reflected pairs are polar, tangential perturbations
    of the outgoing vector are not.  Returns counts for reporting."""
    rng = np.random.default_rng(seed)
    pts = sample_boundary_points(table, model, n_samples, seed=seed)
    ok_polar = 0
    ok_broken = 0
    for x0 in pts:
        frame = boundary_frame(table, model, x0)
        g = frame.metric.g
        # random incoming unit vector, kept away from grazing: for nearly
        # tangent vectors the perturbation is parallel to the vector and is
        # absorbed by renormalization, so the breakage property degenerates
        coeffs = rng.normal(size=table.n - 1)
        w = coeffs @ frame.tangent_basis - (0.1 + abs(rng.normal())) * frame.nu
        w = w / np.sqrt(w @ g @ w)
        v_out = reflect(frame, w)
        u = -w
        if is_polar(frame, u, v_out):
            ok_polar += 1
        t = frame.tangent_basis[rng.integers(table.n - 1)]
        v_pert = v_out + perturbation * t
        v_pert = v_pert / np.sqrt(v_pert @ g @ v_pert)
        if v_pert @ g @ frame.nu < -CONE_TOL:
            # perturbation pushed the vector out of the cone; try the other side
            v_pert = v_out - perturbation * t
            v_pert = v_pert / np.sqrt(v_pert @ g @ v_pert)
        if not is_polar(frame, u, v_pert):
            ok_broken += 1
    return {"n": len(pts), "polar_ok": ok_polar, "perturbation_breaks": ok_broken}
