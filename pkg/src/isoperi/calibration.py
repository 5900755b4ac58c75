"""Sampled verification of d-constant calibrations for closed curves.

A 1-form ``omega = sum_i p_i(x) dx_i`` with pointwise norm at most 1 on a
region, equal to 1 on the unit tangent of a curve ``S`` and with constant
``d omega`` gives, for any competitor ``S'`` in the region with the same
``d omega``-volume, ``|S| = int_S omega = int_S' omega <= |S'|``.

The check here is sampled: the pointwise norm is evaluated on a regular grid
plus the curve points, so a valid result is a *sampled certificate*, not a
proof. The region reading (minimization among competitors that stay inside
the region) is this package's interpretation of a global bound on ``omega``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping

import numpy as np

from .curves import DiscreteCurve, FourierCurve, analytic_tangent, edge_tangents, parameters, sample_fourier
from .errors import InputError
from .forms import AxisPlane, ConstantTwoForm, axis_planes

MAX_DEGREE = 4

Monomials = dict  # exponents tuple -> coefficient


def _eval_poly(poly: Monomials, X: np.ndarray) -> np.ndarray:
    out = np.zeros(X.shape[0])
    for exps, coeff in poly.items():
        term = np.full(X.shape[0], coeff)
        for d, e in enumerate(exps):
            if e:
                term = term * X[:, d] ** e
        out += term
    return out


def _diff_poly(poly: Monomials, d: int) -> Monomials:
    out: Monomials = {}
    for exps, coeff in poly.items():
        e = exps[d]
        if e == 0:
            continue
        new = list(exps)
        new[d] = e - 1
        key = tuple(new)
        out[key] = out.get(key, 0.0) + coeff * e
    return {k: v for k, v in out.items() if v != 0.0}


def _add_poly(a: Monomials, b: Monomials, sign: float = 1.0) -> Monomials:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0.0) + sign * v
    return {k: v for k, v in out.items() if v != 0.0}


class PolynomialOneForm:
    """``sum_i p_i(x) dx_i`` with polynomial components of total degree at most 4.

    Parameters
    ----------
    n : int
    monomials : iterable of (component, exponents, coeff)
        Repeated monomials are summed.
    """

    def __init__(self, n: int, monomials: Iterable = ()):
        self.n = int(n)
        if self.n < 1:
            raise InputError("dimension must be positive")
        comps: list[Monomials] = [{} for _ in range(self.n)]
        for comp, exps, coeff in monomials:
            comp = int(comp)
            exps = tuple(int(e) for e in exps)
            coeff = float(coeff)
            if not 0 <= comp < self.n:
                raise InputError(f"component {comp} out of range for n = {self.n}")
            if len(exps) != self.n or any(e < 0 for e in exps):
                raise InputError(f"exponents {exps} must be {self.n} nonnegative integers")
            if sum(exps) > MAX_DEGREE:
                raise InputError(f"monomial degree {sum(exps)} exceeds {MAX_DEGREE}")
            if not np.isfinite(coeff):
                raise InputError("non-finite coefficient")
            comps[comp][exps] = comps[comp].get(exps, 0.0) + coeff
        self.components = [{k: v for k, v in sorted(p.items()) if v != 0.0} for p in comps]

    @classmethod
    def canonical_primitive(cls, n: int, i: int, j: int, scale: float = 0.5) -> "PolynomialOneForm":
        """``scale * (x_i dx_j - x_j dx_i)``; ``scale = 1/2`` gives ``d omega = dx_i ^ dx_j``."""
        AxisPlane.checked(min(i, j), max(i, j), n)
        ei = tuple(int(k == i) for k in range(n))
        ej = tuple(int(k == j) for k in range(n))
        return cls(n, [(j, ei, scale), (i, ej, -scale)])

    @classmethod
    def from_constant_form(cls, omega: ConstantTwoForm, scale: float = 0.5) -> "PolynomialOneForm":
        """``scale * sum_I Omega_I (x_i dx_j - x_j dx_i)``, the radial primitive when ``scale = 1/2``."""
        n = omega.n
        mons = []
        for (i, j), c in omega.coeffs.items():
            ei = tuple(int(k == i) for k in range(n))
            ej = tuple(int(k == j) for k in range(n))
            mons += [(j, ei, scale * c), (i, ej, -scale * c)]
        return cls(n, mons)

    @property
    def degree(self) -> int:
        return max((sum(e) for p in self.components for e in p), default=0)

    def __call__(self, X) -> np.ndarray:
        """Covector components at points ``X`` (shape ``(P, n)`` or ``(n,)``)."""
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.n:
            raise InputError(f"points must have {self.n} coordinates")
        out = np.stack([_eval_poly(p, X) for p in self.components], axis=1)
        return out[0] if single else out

    def norm(self, X) -> np.ndarray:
        """Pointwise comass, which for a 1-form is the Euclidean norm of the covector."""
        return np.linalg.norm(np.atleast_2d(self(X)), axis=1)

    def pair(self, X, T) -> np.ndarray:
        """``omega_x(T)`` row by row."""
        return np.sum(np.atleast_2d(self(X)) * np.atleast_2d(T), axis=1)

    def to_list(self) -> list[dict]:
        return [
            {"component": i, "exponents": list(e), "coeff": c}
            for i, p in enumerate(self.components)
            for e, c in p.items()
        ]

    @classmethod
    def from_list(cls, n: int, entries: Iterable[Mapping]) -> "PolynomialOneForm":
        try:
            return cls(n, [(e["component"], e["exponents"], e["coeff"]) for e in entries])
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad monomial entry: {exc}") from exc

    def __eq__(self, other):
        return isinstance(other, PolynomialOneForm) and self.n == other.n and self.components == other.components

    def __repr__(self):
        return f"PolynomialOneForm(n={self.n}, monomials={len(self.to_list())})"


@dataclass(frozen=True)
class TwoFormField:
    """Polynomial coefficients of a 2-form, one polynomial per axis plane."""

    n: int
    components: Mapping[AxisPlane, Monomials]

    @property
    def is_constant(self) -> bool:
        return all(set(p) <= {(0,) * self.n} for p in self.components.values())

    def constant_form(self) -> ConstantTwoForm:
        if not self.is_constant:
            raise InputError("2-form has nonconstant coefficients")
        zero = (0,) * self.n
        return ConstantTwoForm(self.n, {pl: p.get(zero, 0.0) for pl, p in self.components.items()})

    def __call__(self, X) -> dict:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return {pl: _eval_poly(p, X) for pl, p in self.components.items()}


def exterior_derivative(omega: PolynomialOneForm) -> TwoFormField:
    """``d omega`` with coefficient ``dp_j/dx_i - dp_i/dx_j`` on ``dx_i ^ dx_j``."""
    comps = {}
    for pl in axis_planes(omega.n) if omega.n >= 2 else []:
        i, j = pl
        c = _add_poly(_diff_poly(omega.components[j], i), _diff_poly(omega.components[i], j), -1.0)
        if c:
            comps[pl] = c
    return TwoFormField(omega.n, comps)


@dataclass(frozen=True)
class Region:
    """Axis-aligned box, optionally intersected with a closed ball."""

    lower: tuple
    upper: tuple
    ball_center: tuple | None = None
    ball_radius: float | None = None

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi) or not lo:
            raise InputError("box bounds must have equal positive length")
        if any(a >= b for a, b in zip(lo, hi)):
            raise InputError("box lower bounds must be below upper bounds")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if (self.ball_center is None) != (self.ball_radius is None):
            raise InputError("ball needs both center and radius")
        if self.ball_center is not None:
            cen = tuple(float(v) for v in self.ball_center)
            if len(cen) != len(lo) or not float(self.ball_radius) > 0:
                raise InputError("bad ball restriction")
            object.__setattr__(self, "ball_center", cen)
            object.__setattr__(self, "ball_radius", float(self.ball_radius))

    @property
    def n(self) -> int:
        return len(self.lower)

    @classmethod
    def box(cls, half_width: float, n: int = 2) -> "Region":
        return cls((-half_width,) * n, (half_width,) * n)

    @classmethod
    def disc(cls, radius: float = 1.0, n: int = 2) -> "Region":
        return cls((-radius,) * n, (radius,) * n, (0.0,) * n, radius)

    def contains(self, X, slack: float = 1e-9) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        lo, hi = np.array(self.lower), np.array(self.upper)
        ok = np.all((X >= lo - slack) & (X <= hi + slack), axis=1)
        if self.ball_center is not None:
            r = np.linalg.norm(X - np.array(self.ball_center), axis=1)
            ok &= r <= self.ball_radius * (1 + slack)
        return ok

    def grid(self, samples: int) -> np.ndarray:
        """Regular grid with ``samples`` points per axis (box corners included), ball-filtered."""
        if samples < 2:
            raise InputError("need at least 2 samples per axis")
        axes = [np.linspace(a, b, samples) for a, b in zip(self.lower, self.upper)]
        X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.n)
        if self.ball_center is not None:
            X = X[np.linalg.norm(X - np.array(self.ball_center), axis=1) <= self.ball_radius]
        return X

    def to_dict(self) -> dict:
        d = {"lower": list(self.lower), "upper": list(self.upper)}
        if self.ball_center is not None:
            d["ball"] = {"center": list(self.ball_center), "radius": self.ball_radius}
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "Region":
        try:
            ball = d.get("ball")
            if ball is None:
                return cls(d["lower"], d["upper"])
            return cls(d["lower"], d["upper"], ball["center"], ball["radius"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad region literal: {exc}") from exc


@dataclass
class Certificate:
    form: PolynomialOneForm
    region: Region
    curve: DiscreteCurve
    comass_margin: float
    tangency_defect: float
    valid: bool
    samples: int
    tol: float
    grid_points: int
    tangency_points: str
    d_omega_constant: bool

    label = "sampled certificate"

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "valid": self.valid,
            "comass_margin": self.comass_margin,
            "tangency_defect": self.tangency_defect,
            "d_omega_constant": self.d_omega_constant,
            "grid_resolution": self.samples,
            "grid_points": self.grid_points,
            "tangency_points": self.tangency_points,
            "tol": self.tol,
            "region": self.region.to_dict(),
            "form": self.form.to_list(),
            "note": "comass bound checked on a finite grid plus curve points; not a proof",
        }


def _chunked_max_norm(omega: PolynomialOneForm, X: np.ndarray, chunk: int = 200_000) -> float:
    best = -np.inf
    for k in range(0, len(X), chunk):
        best = max(best, float(omega.norm(X[k : k + chunk]).max()))
    return best


def verify_certificate(
    omega: PolynomialOneForm,
    region: Region,
    curve: DiscreteCurve | FourierCurve,
    samples: int = 101,
    tol: float = 1e-6,
    curve_points: int = 512,
) -> Certificate:
    """Check the calibration inequalities for ``omega`` on ``region`` along ``curve``.

    ``comass_margin = 1 - max |omega(x)|`` over the grid and the curve points.
    ``tangency_defect = max |1 - omega(T)|``: for a polygon at edge midpoints
    with unit edge tangents; for a :class:`FourierCurve` at ``curve_points``
    parameter samples with the exact unit tangent.

    The polygon route carries an ``O(1/N^2)`` chord error (an inscribed
    polygon's midpoints sit inside the curve), so a tight ``tol`` calls for
    the exact route.
    """
    if omega.n != region.n:
        raise InputError(f"form is on R^{omega.n} but region is in R^{region.n}")
    if isinstance(curve, FourierCurve):
        s = parameters(curve_points)
        pts = curve.point(s)
        T = analytic_tangent(curve, s)
        poly = sample_fourier(curve, curve_points)
        where = f"exact curve points ({curve_points})"
    elif isinstance(curve, DiscreteCurve):
        poly = curve
        x = curve.vertices
        pts = 0.5 * (x + np.roll(x, -1, axis=0))
        T = edge_tangents(curve)
        where = f"edge midpoints ({curve.N})"
    else:
        raise InputError("curve must be a DiscreteCurve or FourierCurve")
    if poly.n != omega.n:
        raise InputError("curve and form dimensions differ")
    if not region.contains(poly.vertices).all() or not region.contains(pts).all():
        raise InputError("curve leaves the region")
    X = region.grid(samples)
    peak = max(_chunked_max_norm(omega, X) if len(X) else -np.inf, float(omega.norm(poly.vertices).max()), float(omega.norm(pts).max()))
    margin = 1.0 - peak
    defect = float(np.abs(1.0 - omega.pair(pts, T)).max())
    return Certificate(
        form=omega,
        region=region,
        curve=poly,
        comass_margin=margin,
        tangency_defect=defect,
        valid=bool(margin >= -tol and defect <= tol),
        samples=int(samples),
        tol=float(tol),
        grid_points=int(len(X)),
        tangency_points=where,
        d_omega_constant=exterior_derivative(omega).is_constant,
    )


def midpoint_line_integral(omega: PolynomialOneForm, c: DiscreteCurve) -> float:
    """``sum_k omega(m_k)(x_{k+1} - x_k)`` with edge midpoints ``m_k``; exact for affine ``omega``."""
    x = c.vertices
    e = np.roll(x, -1, axis=0) - x
    return float(np.sum(omega.pair(x + 0.5 * e, e)))
