"""Constant-curvature ambient geometries on R^d.

Three models, all defined by explicit metric tensors on all of R^d:

* ``euclidean``  -- flat metric, curvature 0.
* ``hyperbolic`` -- g_ij(x) = delta_ij - x_i x_j / (1 + |x|^2), curvature -1.
  This is the pullback of the Minkowski metric under the graph chart
  x -> (x, sqrt(1 + |x|^2)) of the upper hyperboloid sheet.
* ``spherical``  -- g_ij(x) = 4 / (1 + |x|^2)^2 delta_ij, curvature +1,
  i.e. the round metric in stereographic coordinates (projection from the
  north pole, so the chart covers the sphere minus one point).

Christoffel symbols and distances are closed-form; the finite-difference
route lives in the test suite as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericError

MODEL_KINDS = ("euclidean", "hyperbolic", "spherical")

# Allowed roundoff slack when clamping inverse-trig arguments to their domain.
CLAMP_SLACK = 1e-12


def _check_point(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise InvalidInputError(f"expected a point of dimension {dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("non-finite coordinates")
    return x


@dataclass(frozen=True)
class AmbientModel:
    """A constant-curvature model geometry on R^dim."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise InvalidInputError(f"unknown model kind {self.kind!r}")
        if self.dim < 1:
            raise InvalidInputError("model dimension must be >= 1")

    @property
    def kappa(self) -> float:
        """Sectional curvature of the model space."""
        return {"euclidean": 0.0, "hyperbolic": -1.0, "spherical": 1.0}[self.kind]

    def restricted(self) -> "AmbientModel":
        """Same geometry one dimension down.

        The coordinate hyperplane H = {x_dim = 0} is totally geodesic in all
        three models and its induced metric is the same model in dimension
        dim - 1, so table-level computations reuse the ambient formulas.
        """
        return AmbientModel(self.kind, self.dim - 1)


def euclidean(dim: int) -> AmbientModel:
    return AmbientModel("euclidean", dim)


def hyperbolic(dim: int) -> AmbientModel:
    return AmbientModel("hyperbolic", dim)


def spherical(dim: int) -> AmbientModel:
    return AmbientModel("spherical", dim)


@dataclass(frozen=True)
class MetricAt:
    """Metric tensor and its inverse at a point, both symmetric positive."""

    point: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray


def metric_tensor(model: AmbientModel, x) -> MetricAt:
    """Metric tensor of the model at x, with closed-form inverse."""
    x = _check_point(x, model.dim)
    d = model.dim
    if model.kind == "euclidean":
        g = np.eye(d)
        g_inv = np.eye(d)
    elif model.kind == "hyperbolic":
        s = 1.0 + x @ x
        g = np.eye(d) - np.outer(x, x) / s
        g_inv = np.eye(d) + np.outer(x, x)
    else:
        c = 4.0 / (1.0 + x @ x) ** 2
        g = c * np.eye(d)
        g_inv = np.eye(d) / c
    return MetricAt(point=x, g=g, g_inv=g_inv)


def metric_many(model: AmbientModel, X: np.ndarray) -> np.ndarray:
    """Metric tensors at each row of X, shape (N, dim, dim)."""
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    eye = np.eye(d)
    if model.kind == "euclidean":
        return np.broadcast_to(eye, (n, d, d)).copy()
    r2 = np.einsum("ni,ni->n", X, X)
    if model.kind == "hyperbolic":
        return eye[None] - np.einsum("ni,nj->nij", X, X) / (1.0 + r2)[:, None, None]
    c = 4.0 / (1.0 + r2) ** 2
    return c[:, None, None] * eye[None]


def inner(model: AmbientModel, x, u, v) -> float:
    """Riemannian inner product g_x(u, v)."""
    g = metric_tensor(model, x).g
    return float(np.asarray(u) @ g @ np.asarray(v))


def norm(model: AmbientModel, x, v) -> float:
    val = inner(model, x, v, v)
    if val < 0:
        raise NumericError("negative squared norm; metric evaluation failed")
    return float(np.sqrt(val))


def normalize(model: AmbientModel, x, v) -> np.ndarray:
    n = norm(model, x, v)
    if n < 1e-14:
        raise InvalidInputError("cannot normalize a (near-)zero vector")
    return np.asarray(v, dtype=float) / n


def christoffel(model: AmbientModel, x) -> np.ndarray:
    """Christoffel symbols Gamma[k, i, j] of the model metric at x.

    Closed forms:
      euclidean   Gamma = 0
      hyperbolic  Gamma^k_ij = -g_ij(x) x_k
      spherical   Gamma^k_ij = -2/(1+|x|^2) (d_ik x_j + d_jk x_i - d_ij x_k)
    """
    x = _check_point(x, model.dim)
    d = model.dim
    if model.kind == "euclidean":
        return np.zeros((d, d, d))
    if model.kind == "hyperbolic":
        g = metric_tensor(model, x).g
        return -np.multiply.outer(x, g)
    c = -2.0 / (1.0 + x @ x)
    eye = np.eye(d)
    a = np.einsum("ki,j->kij", eye, x)
    return c * (a + a.transpose(0, 2, 1) - np.multiply.outer(x, eye))


def christoffel_quadratic(model: AmbientModel, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Gamma^k_ij v^i v^j without building the full tensor (integrator path)."""
    if model.kind == "euclidean":
        return np.zeros_like(v)
    if model.kind == "hyperbolic":
        s = 1.0 + x @ x
        gvv = v @ v - (x @ v) ** 2 / s
        return -gvv * x
    c = -2.0 / (1.0 + x @ x)
    return c * (2.0 * (x @ v) * v - (v @ v) * x)


def _clamped(value: float, lo: float, hi: float) -> float:
    if value < lo - CLAMP_SLACK or value > hi + CLAMP_SLACK:
        raise NumericError(f"argument {value} outside [{lo}, {hi}] beyond slack {CLAMP_SLACK}")
    return min(max(value, lo), hi)


def sphere_embedding(X: np.ndarray) -> np.ndarray:
    """Inverse stereographic image (2x, |x|^2 - 1) / (1 + |x|^2) on S^dim."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    r2 = np.einsum("ni,ni->n", X, X)
    out = np.empty((X.shape[0], X.shape[1] + 1))
    out[:, :-1] = 2.0 * X
    out[:, -1] = r2 - 1.0
    out /= (1.0 + r2)[:, None]
    return out


def hyperboloid_embedding(X: np.ndarray) -> np.ndarray:
    """Graph chart (x, sqrt(1 + |x|^2)) onto the upper hyperboloid sheet."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    r2 = np.einsum("ni,ni->n", X, X)
    return np.concatenate([X, np.sqrt(1.0 + r2)[:, None]], axis=1)


def distance(model: AmbientModel, p, q) -> float:
    """Geodesic distance between p and q in the model.

    Euclidean: |p - q|.  Hyperbolic: arccosh of the Minkowski pairing of the
    hyperboloid images, evaluated in the cancellation-free arcsinh form.
    Spherical: great-circle distance of the stereographic preimages.
    """
    p = _check_point(p, model.dim)
    q = _check_point(q, model.dim)
    if model.kind == "euclidean":
        return float(np.linalg.norm(p - q))
    if model.kind == "hyperbolic":
        sp = np.sqrt(1.0 + p @ p)
        sq = np.sqrt(1.0 + q @ q)
        # |P - Q|^2 in Minkowski signature; (sp - sq) written to avoid
        # cancellation for nearby points.
        dz = (p @ p - q @ q) / (sp + sq)
        m2 = (p - q) @ (p - q) - dz * dz
        m2 = _clamped(m2, 0.0, np.inf)
        return float(2.0 * np.arcsinh(0.5 * np.sqrt(m2)))
    xp = sphere_embedding(p)[0]
    xq = sphere_embedding(q)[0]
    half_chord = 0.5 * np.linalg.norm(xp - xq)
    return float(2.0 * np.arcsin(_clamped(half_chord, 0.0, 1.0)))


def distance_rowwise(model: AmbientModel, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Distances d(A_i, B_i) for matching rows."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise InvalidInputError("row-wise distance needs equal shapes")
    if model.kind == "euclidean":
        return np.linalg.norm(A - B, axis=1)
    if model.kind == "hyperbolic":
        a2 = np.einsum("ni,ni->n", A, A)
        b2 = np.einsum("ni,ni->n", B, B)
        dz = (a2 - b2) / (np.sqrt(1.0 + a2) + np.sqrt(1.0 + b2))
        m2 = np.einsum("ni,ni->n", A - B, A - B) - dz * dz
        return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(m2, 0.0)))
    xa = sphere_embedding(A)
    xb = sphere_embedding(B)
    half = 0.5 * np.linalg.norm(xa - xb, axis=1)
    return 2.0 * np.arcsin(np.clip(half, 0.0, 1.0))


def distance_cross(model: AmbientModel, A: np.ndarray, B: np.ndarray,
                   chunk: int = 1024) -> np.ndarray:
    """Full distance matrix d(A_i, B_j), computed in row chunks."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    out = np.empty((A.shape[0], B.shape[0]))
    if model.kind == "hyperbolic":
        A_emb = hyperboloid_embedding(A)
        B_emb = hyperboloid_embedding(B)
        for i in range(0, A.shape[0], chunk):
            blk = A_emb[i:i + chunk]
            # Minkowski pairing: cosh d = -<P, Q>
            coshd = blk[:, :-1] @ B_emb[:, :-1].T - np.outer(blk[:, -1], B_emb[:, -1])
            out[i:i + chunk] = np.arccosh(np.maximum(-coshd, 1.0))
        return out
    if model.kind == "spherical":
        A_emb = sphere_embedding(A)
        B_emb = sphere_embedding(B)
        for i in range(0, A.shape[0], chunk):
            dots = A_emb[i:i + chunk] @ B_emb.T
            out[i:i + chunk] = np.arccos(np.clip(dots, -1.0, 1.0))
        return out
    for i in range(0, A.shape[0], chunk):
        diff = A[i:i + chunk, None, :] - B[None, :, :]
        out[i:i + chunk] = np.sqrt(np.einsum("nmk,nmk->nm", diff, diff))
    return out


def rho_kappa(kappa: float, r) -> np.ndarray | float:
    """Comparison profile: (1 - cos(r sqrt(k)))/k for k > 0, r^2/2 at k = 0,
    (1 - cosh(r sqrt(-k)))/k for k < 0.  Requires r >= 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise InvalidInputError("rho_kappa needs r >= 0")
    if kappa > 0:
        out = (1.0 - np.cos(r * np.sqrt(kappa))) / kappa
    elif kappa < 0:
        out = (1.0 - np.cosh(r * np.sqrt(-kappa))) / kappa
    else:
        out = 0.5 * r * r
    return out if out.shape else float(out)


def alpha_kappa(kappa: float) -> float:
    """Diameter bound pi/sqrt(kappa) for positive kappa, +inf otherwise."""
    if kappa > 0:
        return float(np.pi / np.sqrt(kappa))
    return float("inf")


def induced_metric_on_H(model: AmbientModel, x) -> MetricAt:
    """Induced metric of the hyperplane H = {x_dim = 0} at (x, 0).

    For all three models the mixed terms g_{i,dim} vanish on H, and the
    restriction equals the same model in dimension dim - 1.
    """
    x = _check_point(x, model.dim - 1)
    return metric_tensor(model.restricted(), x)


def geodesic_between(model: AmbientModel, p, q, num: int = 33) -> np.ndarray:
    """Points of the connecting geodesic from p to q (num samples, endpoints
    included), via the totally geodesic embeddings."""
    p = _check_point(p, model.dim)
    q = _check_point(q, model.dim)
    if num < 2:
        raise InvalidInputError("need at least two samples")
    t = np.linspace(0.0, 1.0, num)
    if model.kind == "euclidean":
        return p[None] + t[:, None] * (q - p)[None]
    if model.kind == "hyperbolic":
        P = hyperboloid_embedding(p)[0]
        Q = hyperboloid_embedding(q)[0]
        d = distance(model, p, q)
        if d < 1e-14:
            return np.tile(p, (num, 1))
        W = (Q - np.cosh(d) * P) / np.sinh(d)
        curve = np.outer(np.cosh(t * d), P) + np.outer(np.sinh(t * d), W)
        return curve[:, :-1]
    X = sphere_embedding(p)[0]
    Y = sphere_embedding(q)[0]
    d = distance(model, p, q)
    if d < 1e-14:
        return np.tile(p, (num, 1))
    if d > np.pi - 1e-9:
        raise NumericError("endpoints are antipodal; connecting geodesic not unique")
    W = (Y - np.cos(d) * X) / np.sin(d)
    curve = np.outer(np.cos(t * d), X) + np.outer(np.sin(t * d), W)
    denom = 1.0 - curve[:, -1]
    if np.any(denom < 1e-12):
        raise NumericError("geodesic passes through the stereographic pole")
    return curve[:, :-1] / denom[:, None]
