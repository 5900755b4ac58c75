"""Length, the three volume notions, and their first variations.

Everything here acts on ``DiscreteCurve`` vertices directly, and the
gradients are exact for the polygon. The signed area of the projection onto
the axis plane ``(i, j)`` is the shoelace sum

    V_ij = 1/2 sum_k (x_i^k x_j^{k+1} - x_j^k x_i^{k+1}),

which is also what the canonical primitive ``1/2 (x_i dx_j - x_j dx_i)``
integrates to along the polygon.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .curves import DiscreteCurve, FourierCurve, parameters
from .errors import InputError, ResolutionError
from .forms import AxisPlane, ConstantTwoForm, axis_planes


@dataclass(frozen=True)
class MultiVolume:
    """Signed projected areas ``V_I``, one per axis plane ``i < j``."""

    n: int
    values: Mapping[AxisPlane, float] = field(default_factory=dict)

    def __post_init__(self):
        vals = {}
        for p, v in dict(self.values).items():
            p = AxisPlane.checked(p[0], p[1], self.n)
            v = float(v)
            if not np.isfinite(v):
                raise InputError(f"non-finite volume on plane {tuple(p)}")
            vals[p] = v
        object.__setattr__(self, "values", MappingProxyType(dict(sorted(vals.items()))))

    def __getitem__(self, plane) -> float:
        i, j = plane
        if i > j:
            return -self.values.get(AxisPlane(j, i), 0.0)
        return self.values.get(AxisPlane(i, j), 0.0)

    def matrix(self) -> np.ndarray:
        M = np.zeros((self.n, self.n))
        for (i, j), v in self.values.items():
            M[i, j] = v
            M[j, i] = -v
        return M

    def vector(self, planes: Sequence[AxisPlane] | None = None) -> np.ndarray:
        planes = axis_planes(self.n) if planes is None else planes
        return np.array([self[p] for p in planes])

    def rotated(self, R) -> "MultiVolume":
        """Multi-volume of the rotated curve ``x -> R x`` (Lambda^2 action)."""
        R = np.asarray(R, dtype=float)
        M = R @ self.matrix() @ R.T
        return MultiVolume(self.n, {p: M[p.i, p.j] for p in axis_planes(self.n)})

    def pair(self, omega: ConstantTwoForm) -> float:
        if omega.n != self.n:
            raise InputError(f"dimension mismatch: form on R^{omega.n}, volume in R^{self.n}")
        return float(sum(c * self[p] for p, c in omega.coeffs.items()))

    def to_dict(self) -> dict:
        return {p.key(): v for p, v in self.values.items()}

    @classmethod
    def from_dict(cls, n: int, d: Mapping[str, float]) -> "MultiVolume":
        vals = {}
        try:
            for key, v in d.items():
                i, j = (int(t) for t in key.split(","))
                vals[AxisPlane.checked(i, j, n)] = float(v)
        except (ValueError, AttributeError) as exc:
            raise InputError(f"bad multi-volume key: {exc}") from exc
        return cls(n, vals)


@dataclass(frozen=True)
class VolumeBracket:
    """Two-sided bound ``lower <= v(S) <= upper`` on the least spanning area."""

    lower: float
    upper: float

    def __post_init__(self):
        if self.lower < 0 or self.upper < 0:
            raise InputError("volume bounds are nonnegative")
        if self.lower > self.upper * (1 + 1e-9) + 1e-12:
            raise InputError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper}


# length -------------------------------------------------------------------


def length(c: DiscreteCurve) -> float:
    return float(c.edge_lengths().sum())


def length_gradient(c: DiscreteCurve) -> np.ndarray:
    """Exact gradient of polygon length: ``u_{k-1} - u_k`` at vertex k.

    ``u_k`` is the unit vector along edge ``k -> k+1``. Paired with a
    variation field this is ``-int m H . v`` tested against vertex hat
    functions, i.e. the weak mean curvature with a sign flip.
    """
    e = c.edges()
    u = e / np.linalg.norm(e, axis=1)[:, None]
    return np.roll(u, 1, axis=0) - u


def length_hessian(c: DiscreteCurve) -> np.ndarray:
    """Dense Hessian of polygon length, shape ``(N*n, N*n)``, vertex-major."""
    N, n = c.N, c.n
    e = c.edges()
    ell = np.linalg.norm(e, axis=1)
    u = e / ell[:, None]
    B = (np.eye(n)[None] - u[:, :, None] * u[:, None, :]) / ell[:, None, None]
    H = np.zeros((N, n, N, n))
    k = np.arange(N)
    k1 = (k + 1) % N
    np.add.at(H, (k, slice(None), k, slice(None)), B)
    np.add.at(H, (k1, slice(None), k1, slice(None)), B)
    np.add.at(H, (k, slice(None), k1, slice(None)), -B)
    np.add.at(H, (k1, slice(None), k, slice(None)), -B)
    return H.reshape(N * n, N * n)


# multi-volume ---------------------------------------------------------------


def _planes_for(c_n: int, planes) -> list[AxisPlane]:
    if planes is None:
        return axis_planes(c_n)
    return [AxisPlane.checked(p[0], p[1], c_n) for p in planes]


def multi_volume(c: DiscreteCurve, planes=None) -> MultiVolume:
    """Signed shoelace area of the projection onto every (or each listed) axis plane."""
    if c.n < 2:
        raise InputError("multi-volume needs n >= 2")
    x = c.vertices
    y = np.roll(x, -1, axis=0)
    # W[i, j] = sum_k x_i^k x_j^{k+1}
    W = x.T @ y
    M = 0.5 * (W - W.T)
    return MultiVolume(c.n, {p: M[p.i, p.j] for p in _planes_for(c.n, planes)})


def fourier_multi_volume(c: FourierCurve, N: int, planes=None) -> MultiVolume:
    """Multi-volume of the smooth curve by N-point periodic trapezoid quadrature.

    The integrand ``1/2 (x_i x_j' - x_j x_i')`` is a trigonometric polynomial
    of degree at most twice the top frequency, so the rule is exact (up to
    rounding) once ``N > 4 * max_frequency``.
    """
    if N <= 4 * c.max_frequency:
        raise ResolutionError(f"N = {N} too small for max frequency {c.max_frequency}")
    s = parameters(N)
    x = c.point(s)
    dx = c.derivative(s, 1)
    W = x.T @ dx * (2 * np.pi / N)
    M = 0.5 * (W - W.T)
    return MultiVolume(c.n, {p: M[p.i, p.j] for p in _planes_for(c.n, planes)})


def multi_volume_jacobian(c: DiscreteCurve, planes=None) -> dict[AxisPlane, np.ndarray]:
    """Gradient of each ``V_ij`` with respect to the vertices.

    ``dV_ij/dx_i^k = (x_j^{k+1} - x_j^{k-1}) / 2`` and
    ``dV_ij/dx_j^k = -(x_i^{k+1} - x_i^{k-1}) / 2``; other components vanish.
    """
    x = c.vertices
    d = 0.5 * (np.roll(x, -1, axis=0) - np.roll(x, 1, axis=0))
    out = {}
    for p in _planes_for(c.n, planes):
        g = np.zeros_like(x)
        g[:, p.i] = d[:, p.j]
        g[:, p.j] = -d[:, p.i]
        out[p] = g
    return out


def jacobian_matrix(c: DiscreteCurve, planes) -> np.ndarray:
    """Stack of flattened multi-volume gradients, shape ``(len(planes), N*n)``."""
    jac = multi_volume_jacobian(c, planes)
    return np.stack([g.ravel() for g in jac.values()]) if jac else np.zeros((0, c.N * c.n))


def two_form_volume_hessian(A: np.ndarray, N: int) -> np.ndarray:
    """Constant Hessian of ``1/2 sum_k x_k^T A x_{k+1}`` for skew ``A``."""
    n = A.shape[0]
    H = np.zeros((N, n, N, n))
    k = np.arange(N)
    k1 = (k + 1) % N
    H[k, :, k1, :] += 0.5 * A
    H[k1, :, k, :] += 0.5 * A.T
    return H.reshape(N * n, N * n)


def multi_volume_hessian(plane: AxisPlane, n: int, N: int) -> np.ndarray:
    return two_form_volume_hessian(ConstantTwoForm.axis(n, *plane).matrix(), N)


# omega-volume -------------------------------------------------------------------


def _check_form(c: DiscreteCurve, omega: ConstantTwoForm):
    if omega.n != c.n:
        raise InputError(f"form lives on R^{omega.n} but curve is in R^{c.n}")


def omega_volume(c: DiscreteCurve, omega: ConstantTwoForm) -> float:
    """``sum_I omega_I V_I(c)``, the integral of the canonical primitive of ``omega``."""
    _check_form(c, omega)
    return multi_volume(c).pair(omega)


def omega_volume_gradient(c: DiscreteCurve, omega: ConstantTwoForm) -> np.ndarray:
    _check_form(c, omega)
    x = c.vertices
    d = 0.5 * (np.roll(x, -1, axis=0) - np.roll(x, 1, axis=0))
    return d @ omega.matrix().T


def primitive_integral(c: DiscreteCurve, i: int, j: int) -> float:
    """Exact integral of the non-canonical primitive ``x_i dx_j`` along the polygon.

    On closed curves this agrees with ``V_ij``; kept as an independent route.
    """
    x = c.vertices
    y = np.roll(x, -1, axis=0)
    mid = 0.5 * (x + y)
    return float(np.sum(mid[:, i] * (y[:, j] - x[:, j])))


# stationarity ---------------------------------------------------------------


@dataclass(frozen=True)
class StationarityFit:
    """Least-squares multiplier form for weak stationarity.

    ``residual`` is ``|grad L - sum_I form_I grad V_I| / |grad L|``.
    """

    form: ConstantTwoForm
    residual: float
    rank: int
    degenerate: bool
    planes: tuple[AxisPlane, ...]


def stationarity_fit(c: DiscreteCurve, planes=None, rcond: float = 1e-10) -> StationarityFit:
    """Fit the constant 2-form that best balances the length gradient.

    Solves ``min_w |grad L - sum_I w_I grad V_I|`` over the allowed planes.
    When the plane gradients are linearly dependent the minimum-norm solution
    is returned with ``degenerate=True``.
    """
    planes = _planes_for(c.n, planes)
    g = length_gradient(c).ravel()
    A = jacobian_matrix(c, planes).T
    coef, _, rank, sv = np.linalg.lstsq(A, g, rcond=rcond)
    r = g - A @ coef
    gnorm = np.linalg.norm(g)
    residual = float(np.linalg.norm(r) / gnorm) if gnorm > 0 else 0.0
    form = ConstantTwoForm(c.n, {p: w for p, w in zip(planes, coef)})
    return StationarityFit(form, residual, int(rank), int(rank) < len(planes), tuple(planes))


# spanning volume ------------------------------------------------------------------


def best_projection_area(M: np.ndarray) -> float:
    """Largest ``|<V, P>|`` over oriented unit 2-planes ``P``: top singular value of ``M``."""
    if not np.any(M):
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[0])


def principal_plane_area(c: DiscreteCurve, M: np.ndarray) -> float:
    """``|<V, u ^ w>|`` for the top two principal axes of the vertex cloud."""
    x = c.vertices - c.vertices.mean(axis=0)
    _, _, vt = np.linalg.svd(x, full_matrices=False)
    u, w = vt[0], vt[1]
    return float(abs(u @ M @ w))


def cone_area(c: DiscreteCurve, apex) -> float:
    """Area of the triangulated cone joining ``apex`` to every edge."""
    a = c.vertices - np.asarray(apex, dtype=float)
    b = np.roll(a, -1, axis=0)
    aa = np.sum(a * a, axis=1)
    bb = np.sum(b * b, axis=1)
    ab = np.sum(a * b, axis=1)
    return float(0.5 * np.sum(np.sqrt(np.clip(aa * bb - ab * ab, 0.0, None))))


def spanning_volume_bracket(c: DiscreteCurve) -> VolumeBracket:
    """Bracket the least area ``v(S)`` of a surface bounded by ``c``.

    Lower bound: projection onto a plane does not increase area, so any
    spanning surface has area at least the projected signed area of ``c``.
    We take the best plane, which dominates both the axis planes and the
    principal-axis plane. Upper bound: the smallest cone over the vertex
    centroid or any vertex.
    """
    if c.n < 2:
        raise InputError("spanning volume needs n >= 2")
    M = multi_volume(c).matrix()
    axis_best = float(np.abs(M).max())
    lower = max(axis_best, principal_plane_area(c, M), best_projection_area(M))
    x = c.vertices
    candidates = np.vstack([x.mean(axis=0)[None], x])
    upper = min(cone_area(c, p) for p in candidates)
    return VolumeBracket(lower, max(upper, lower))


def h_zero(c: DiscreteCurve, v):
    """``|S| / ((m + 1) v)`` with m = 1, i.e. ``length / (2 v)``.

    ``v`` may be a positive number or a ``VolumeBracket``; for a bracket the
    result is the interval ``(length / (2 upper), length / (2 lower))``.
    """
    L = length(c)
    if isinstance(v, VolumeBracket):
        if v.lower <= 0:
            raise InputError("volume bracket has zero lower bound; H0 is unbounded")
        return (L / (2 * v.upper), L / (2 * v.lower))
    v = float(v)
    if not v > 0:
        raise InputError(f"volume must be positive, got {v}")
    return L / (2 * v)
