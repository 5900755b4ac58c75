"""Second variation of length under volume constraints.

The stability operator is the Hessian of the Lagrangian

    L(x) = length(x) - sum_I lambda_I V_I(x)

at fitted multipliers, restricted to the kernel of the constraint Jacobian.
It is assembled by central differences of the exact Lagrangian gradient, so
it is the Hessian of the discrete energy that the optimizer minimizes, not a
discretization of a continuum Jacobi operator.

Rigid motions that leave the Lagrangian invariant are exact zero modes and are
removed before the eigendecomposition. Near-tangential eigenvectors
(reparametrizations of the polygon) are only flagged, because a polygon has
no exact reparametrization symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .curves import DiscreteCurve, as_vertex_field, vertex_tangents
from .errors import InputError, NumericalError, PreconditionError
from .forms import ConstantTwoForm
from .functionals import length, length_gradient
from .optimizer import ConstraintSet, project_to_constraints

TANGENT_ANGLE_DEG = 10.0
TANGENT_FRACTION = 0.9
ASYMMETRY_LIMIT = 1e-4


@dataclass
class SpectrumReport:
    """Spectrum of the constrained, rigid-deflated Lagrangian Hessian.

    Attributes
    ----------
    eigenvalues : ndarray
        Ascending.
    verdict : str
        ``"stable"``, ``"unstable"`` or ``"marginal"``; marginal means
        ``|min_eigenvalue| <= tol``.
    tangential : ndarray of bool
        Which eigenvectors look like reparametrizations. They stay in the
        spectrum and count towards the verdict.
    """

    eigenvalues: np.ndarray
    min_eigenvalue: float
    verdict: str
    tol: float
    multipliers: ConstantTwoForm
    stationarity_residual: float
    asymmetry: float
    hessian_norm: float
    deflated_mode_counts: dict = field(default_factory=dict)
    tangential: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    eigenvectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def min_non_tangential(self) -> float:
        keep = ~self.tangential
        return float(self.eigenvalues[keep].min()) if keep.any() else np.nan

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(w) for w in self.eigenvalues],
            "min_eigenvalue": self.min_eigenvalue,
            "verdict": self.verdict,
            "tol": self.tol,
            "multipliers": self.multipliers.to_list(),
            "stationarity_residual": self.stationarity_residual,
            "asymmetry": self.asymmetry,
            "deflated_mode_counts": dict(self.deflated_mode_counts),
            "tangential_mode_indices": [int(k) for k in np.flatnonzero(self.tangential)],
        }


def verdict_for(min_eigenvalue: float, tol: float) -> str:
    if abs(min_eigenvalue) <= tol:
        return "marginal"
    return "stable" if min_eigenvalue > 0 else "unstable"


def fit_multipliers(c: DiscreteCurve, cs: ConstraintSet) -> tuple[np.ndarray, float]:
    """Least-squares multipliers over the constrained functionals and the relative residual."""
    g = length_gradient(c).ravel()
    J = cs.jacobian(c)
    lam, *_ = np.linalg.lstsq(J.T, g, rcond=None)
    res = np.linalg.norm(g - J.T @ lam) / np.linalg.norm(g)
    return lam, float(res)


def _lagrangian_gradient(X: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Batched gradient of ``length - Omega-volume``; ``X`` has shape ``(B, N, n)``."""
    e = np.roll(X, -1, axis=1) - X
    u = e / np.linalg.norm(e, axis=2, keepdims=True)
    gl = np.roll(u, 1, axis=1) - u
    gv = 0.5 * (np.roll(X, -1, axis=1) - np.roll(X, 1, axis=1)) @ A.T
    return gl - gv


def lagrangian_hessian_fd(c: DiscreteCurve, form: ConstantTwoForm, h: float | None = None, batch: int = 256):
    """Central-difference Hessian of the Lagrangian gradient.

    Returns the symmetrized matrix and the relative asymmetry
    ``max|H - H^T| / max|H|`` measured before symmetrizing.
    """
    x = c.vertices
    N, n = x.shape
    if h is None:
        h = 1e-5 * float(np.mean(c.edge_lengths()))
    A = form.matrix()
    D = N * n
    H = np.empty((D, D))
    for start in range(0, D, batch):
        cols = np.arange(start, min(start + batch, D))
        E = np.zeros((len(cols), D))
        E[np.arange(len(cols)), cols] = h
        E = E.reshape(len(cols), N, n)
        gp = _lagrangian_gradient(x[None] + E, A)
        gm = _lagrangian_gradient(x[None] - E, A)
        H[:, cols] = ((gp - gm) / (2 * h)).reshape(len(cols), D).T
    scale = np.abs(H).max()
    asym = float(np.abs(H - H.T).max() / scale) if scale > 0 else 0.0
    return 0.5 * (H + H.T), asym


def _rotation_fields(x: np.ndarray) -> tuple[list, np.ndarray]:
    N, n = x.shape
    gens, fields = [], []
    for i, j in combinations(range(n), 2):
        B = np.zeros((n, n))
        B[i, j], B[j, i] = -1.0, 1.0
        gens.append(B)
        fields.append((x @ B.T).ravel())
    return gens, np.array(fields).T


def _symmetry_modes(x: np.ndarray, A: np.ndarray, J: np.ndarray):
    """Rigid fields that are exact symmetries of the constrained Lagrangian.

    Translations always qualify. A rotation generator ``B`` qualifies when it
    commutes with the multiplier form (so the Lagrangian is invariant along
    its orbit) and its field lies in ``ker J``.
    """
    N, n = x.shape
    trans = np.kron(np.ones((N, 1)), np.eye(n))
    gens, R = _rotation_fields(x)
    if not gens:
        return trans, 0
    # linear map B -> [B, A] on so(n); its kernel is the stabilizer of the form
    C = np.array([(B @ A - A @ B).ravel() for B in gens]).T
    scaleA = max(np.abs(A).max(), 1.0)
    _, sv, Vt = np.linalg.svd(C, full_matrices=True)
    null = Vt[np.sum(sv > 1e-10 * scaleA):].T
    if null.shape[1] == 0:
        return trans, 0
    fields = R @ null
    # keep the combinations whose fields preserve the constraints to first order
    JF = J @ fields
    _, sv2, Vt2 = np.linalg.svd(JF, full_matrices=True)
    tol = 1e-8 * max(np.linalg.norm(fields), 1.0) * max(np.linalg.norm(J), 1.0)
    keep = Vt2[np.sum(sv2 > tol):].T
    fields = fields @ keep
    return np.hstack([trans, fields]), fields.shape[1]


def _tangential_flags(x: np.ndarray, modes: np.ndarray) -> np.ndarray:
    N, n = x.shape
    T = vertex_tangents(DiscreteCurve(x))
    V = modes.T.reshape(-1, N, n)
    norms = np.linalg.norm(V, axis=2)
    cosang = np.abs(np.einsum("bkd,kd->bk", V, T)) / np.where(norms > 0, norms, np.inf)
    within = cosang >= np.cos(np.radians(TANGENT_ANGLE_DEG))
    return within.mean(axis=1) >= TANGENT_FRACTION


def constrained_hessian_spectrum(
    c: DiscreteCurve,
    cs: ConstraintSet,
    tol_g: float = 1e-4,
    tol: float | None = None,
    h: float | None = None,
    keep_vectors: bool = False,
) -> SpectrumReport:
    """Spectrum of the Lagrangian Hessian on the constraint-tangent space.

    Parameters
    ----------
    tol_g : float
        ``c`` must be stationary: the multiplier fit residual must not exceed
        ``10 * tol_g``; otherwise ``PreconditionError``.
    tol : float, optional
        Width of the marginal band; default ``1e-6 * ||H||_F``.
    h : float, optional
        Finite-difference step; default ``1e-5`` times the mean edge length.
    """
    cs._check(c)
    lam, res = fit_multipliers(c, cs)
    if res > 10 * tol_g:
        raise PreconditionError(f"curve is not stationary for these constraints (residual {res:.3g} > {10 * tol_g:.3g})")
    form = cs.lagrangian_form(lam)
    H, asym = lagrangian_hessian_fd(c, form, h)
    if asym > ASYMMETRY_LIMIT:
        raise NumericalError(f"finite-difference Hessian asymmetric (relative {asym:.3g})")
    x = c.vertices
    N, n = x.shape
    J = cs.jacobian(c)
    rigid, n_rot = _symmetry_modes(x, form.matrix(), J)
    M = np.hstack([J.T, rigid])
    Q, Rr = np.linalg.qr(M, mode="complete")
    d = np.abs(np.diag(Rr))
    rank = int(np.sum(d > 1e-10 * d.max()))
    Z = Q[:, rank:]
    K = Z.T @ H @ Z
    w, U = np.linalg.eigh(0.5 * (K + K.T))
    hnorm = float(np.linalg.norm(H))
    if tol is None:
        tol = 1e-6 * hnorm
    modes = Z @ U
    tangential = _tangential_flags(x, modes)
    wmin = float(w[0])
    return SpectrumReport(
        eigenvalues=w,
        min_eigenvalue=wmin,
        verdict=verdict_for(wmin, tol),
        tol=float(tol),
        multipliers=form,
        stationarity_residual=res,
        asymmetry=asym,
        hessian_norm=hnorm,
        deflated_mode_counts={
            "constraints": int(J.shape[0]),
            "translations": n,
            "rotations": int(n_rot),
            "tangential_flagged": int(tangential.sum()),
        },
        tangential=tangential,
        eigenvectors=modes if keep_vectors else None,
    )


class SecondVariation(NamedTuple):
    """First-order constraint derivatives and second derivatives along a variation.

    ``d2_length`` is the straight-line second derivative of length.
    ``d2_lagrangian`` subtracts the multiplier-weighted constraint curvature;
    it equals the second derivative of length along a constraint-preserving
    path through ``c`` tangent to ``v``.
    """

    dV_first_order: np.ndarray
    d2_length: float
    d2_lagrangian: float
    multipliers: ConstantTwoForm


def _second_difference(f, h):
    f0 = f(0.0)
    return (f(h) - 2 * f0 + f(-h)) / h**2


def directional_second_variation(c: DiscreteCurve, v, cs: ConstraintSet, h: float = 1e-4) -> SecondVariation:
    """Constraint derivatives and second variation along ``c + t v``.

    ``d2_length`` is a central second difference with step ``h``,
    Richardson-extrapolated once (``h`` and ``h/2``).
    """
    cs._check(c)
    v = as_vertex_field(v, c)
    x = c.vertices
    dV = cs.jacobian(c) @ v.ravel()

    def L(t):
        return length(DiscreteCurve(x + t * v))

    d1 = _second_difference(L, h)
    d2 = _second_difference(L, h / 2)
    d2L = (4 * d2 - d1) / 3
    lam, _ = fit_multipliers(c, cs)
    form = cs.lagrangian_form(lam)
    # every V_I is quadratic, so d^2/dt^2 of Omega-volume along x + t v is exact
    d2V = float(np.sum(v * (0.5 * (np.roll(v, -1, 0) - np.roll(v, 1, 0)) @ form.matrix().T)))
    return SecondVariation(dV, float(d2L), float(d2L - d2V), form)


def projected_second_variation(c: DiscreteCurve, v, cs: ConstraintSet, h: float = 1e-3) -> float:
    """Second difference of length along ``t -> project(c + t v)``.

    An independent route to ``d2_lagrangian`` when ``v`` preserves the
    constraints to first order: projection adds an ``O(t^2)`` normal correction
    that turns the straight-line value into the Lagrangian one.
    """
    v = as_vertex_field(v, c)
    x = c.vertices

    def L(t):
        return length(project_to_constraints(DiscreteCurve(x + t * v), cs, tol=1e-13))

    d1 = _second_difference(L, h)
    d2 = _second_difference(L, h / 2)
    return float((4 * d2 - d1) / 3)


def smoothed_sign(s, delta: float = 0.5) -> np.ndarray:
    """Smooth version of ``+1`` on ``[0, pi)`` and ``-1`` on ``[pi, 2 pi)``."""
    if delta <= 0:
        raise InputError("smoothing width must be positive")
    return np.tanh(np.sin(np.asarray(s, dtype=float)) / delta)


def loop_transfer_field(N: int, delta: float = 0.5, planes=((2, 3),), n: int = 4, frequency: int = 2) -> np.ndarray:
    """Shrink one loop of a doubly covered circle and grow the other.

    At parameter ``s_k = 2 pi k / N`` the field is
    ``phi(s) (cos w s, sin w s)`` in the given plane, where ``phi`` is
    :func:`smoothed_sign`. For the double curve (``w = 2`` in plane (2, 3)) it
    moves area from one loop of the second factor to the other, so ``V_23``
    is unchanged to first order.
    """
    s = 2 * np.pi * np.arange(N) / N
    phi = smoothed_sign(s, delta)
    v = np.zeros((N, n))
    for p, q in planes:
        v[:, p] = phi * np.cos(frequency * s)
        v[:, q] = phi * np.sin(frequency * s)
    return v
