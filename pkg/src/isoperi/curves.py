"""Closed curves in R^n.

Two representations:

``DiscreteCurve``
    a closed polygon; vertex ``N-1`` connects back to vertex 0.
``FourierCurve``
    ``C(s) = a0 + sum_j a_j (cos(w_j s) e_p + sin(w_j s) e_q)`` with each term
    rotating in its own coordinate plane ``(p, q)``. Stationary curves for
    prescribed multi-volume have this shape.

Per-vertex vector fields (variations, gradients) are plain ``(N, n)`` arrays.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import InputError, ResolutionError

#: per-vertex vector field on a DiscreteCurve, shape ``(N, n)``
VertexField = np.ndarray


@dataclass(frozen=True, eq=False)
class DiscreteCurve:
    """Closed polygon with vertices stored as a read-only ``(N, n)`` array."""

    vertices: np.ndarray

    def __post_init__(self):
        x = np.array(self.vertices, dtype=float, copy=True)
        if x.ndim != 2:
            raise InputError(f"vertices must be an (N, n) array, got shape {x.shape}")
        N, n = x.shape
        if N < 3:
            raise InputError(f"a closed curve needs at least 3 vertices, got {N}")
        if n < 1:
            raise InputError("ambient dimension must be positive")
        if not np.all(np.isfinite(x)):
            raise InputError("vertex coordinates must be finite")
        if np.any(np.all(np.roll(x, -1, axis=0) == x, axis=1)):
            raise InputError("consecutive vertices coincide (zero-length edge)")
        x.setflags(write=False)
        object.__setattr__(self, "vertices", x)

    @property
    def N(self) -> int:
        return self.vertices.shape[0]

    @property
    def n(self) -> int:
        return self.vertices.shape[1]

    def __len__(self):
        return self.N

    def __repr__(self):
        return f"DiscreteCurve(N={self.N}, n={self.n})"

    def edges(self) -> np.ndarray:
        """Edge vectors ``x[k+1] - x[k]``, shape ``(N, n)``."""
        x = self.vertices
        return np.roll(x, -1, axis=0) - x

    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edges(), axis=1)

    def moved(self, field) -> "DiscreteCurve":
        """Curve with every vertex displaced by ``field``."""
        field = as_vertex_field(field, self)
        return DiscreteCurve(self.vertices + field)

    def translated(self, shift) -> "DiscreteCurve":
        shift = np.asarray(shift, dtype=float)
        if shift.shape != (self.n,):
            raise InputError(f"shift must have length {self.n}")
        return DiscreteCurve(self.vertices + shift)

    def scaled(self, factor: float) -> "DiscreteCurve":
        return DiscreteCurve(float(factor) * self.vertices)

    def transformed(self, R) -> "DiscreteCurve":
        """Apply a linear map ``x -> R x`` to every vertex."""
        R = np.asarray(R, dtype=float)
        if R.shape != (self.n, self.n):
            raise InputError(f"map must be {self.n}x{self.n}")
        return DiscreteCurve(self.vertices @ R.T)

    def reversed(self) -> "DiscreteCurve":
        return DiscreteCurve(self.vertices[::-1])

    def embedded(self, n: int, axes: Sequence[int] | None = None) -> "DiscreteCurve":
        """Copy into R^n, placing current coordinates on ``axes`` (default: leading axes)."""
        axes = list(range(self.n)) if axes is None else list(axes)
        if len(axes) != self.n or max(axes) >= n:
            raise InputError("axes do not fit the target dimension")
        out = np.zeros((self.N, n))
        out[:, axes] = self.vertices
        return DiscreteCurve(out)

    # serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {"n": self.n, "vertices": self.vertices.tolist()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "DiscreteCurve":
        try:
            n = int(d["n"])
            verts = np.asarray(d["vertices"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad curve literal: {exc}") from exc
        if verts.ndim != 2 or verts.shape[1] != n:
            raise InputError(f"vertices do not have {n} coordinates each")
        return cls(verts)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DiscreteCurve":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"curve file is not valid JSON: {exc}") from exc


def as_vertex_field(field, curve: DiscreteCurve) -> np.ndarray:
    field = np.asarray(field, dtype=float)
    if field.shape != curve.vertices.shape:
        raise InputError(f"vertex field has shape {field.shape}, curve has {curve.vertices.shape}")
    return field


class FourierTerm(NamedTuple):
    w: int
    a: float
    plane: tuple[int, int]


@dataclass(frozen=True)
class FourierCurve:
    """Finite trigonometric closed curve; see the module docstring."""

    n: int
    a0: tuple[float, ...]
    terms: tuple[FourierTerm, ...]

    def __post_init__(self):
        n = int(self.n)
        a0 = tuple(float(v) for v in self.a0)
        if len(a0) != n:
            raise InputError(f"a0 must have {n} coordinates")
        if not all(np.isfinite(a0)):
            raise InputError("a0 must be finite")
        terms = []
        for t in self.terms:
            if isinstance(t, Mapping):
                t = (t["w"], t["a"], t["plane"])
            w, a, plane = t
            if int(w) != w or int(w) <= 0:
                raise InputError(f"frequency must be a positive integer, got {w}")
            if not (np.isfinite(a) and a > 0):
                raise InputError(f"amplitude must be positive, got {a}")
            p, q = (int(v) for v in plane)
            if p == q or not (0 <= p < n and 0 <= q < n):
                raise InputError(f"term plane {(p, q)} invalid for n = {n}")
            terms.append(FourierTerm(int(w), float(a), (p, q)))
        if not terms:
            raise InputError("a Fourier curve needs at least one term")
        ws = [t.w for t in terms]
        if any(b <= a for a, b in zip(ws, ws[1:])):
            raise InputError("frequencies must be strictly increasing")
        used = [ax for t in terms for ax in t.plane]
        if len(set(used)) != len(used):
            raise InputError("term planes must be disjoint axis pairs")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def max_frequency(self) -> int:
        return max(t.w for t in self.terms)

    def _eval(self, s, order: int) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.zeros((s.size, self.n))
        if order == 0:
            out += np.asarray(self.a0)
        for w, a, (p, q) in self.terms:
            c, sn = np.cos(w * s), np.sin(w * s)
            # d^k/ds^k of (cos, sin) is w^k times a quarter-turn rotation applied k times
            k = order % 4
            dp, dq = [(c, sn), (-sn, c), (-c, -sn), (sn, -c)][k]
            amp = a * float(w) ** order
            out[:, p] += amp * dp
            out[:, q] += amp * dq
        return out

    def point(self, s) -> np.ndarray:
        return self._eval(s, 0)

    def derivative(self, s, order: int = 1) -> np.ndarray:
        return self._eval(s, order)

    def translated(self, shift) -> "FourierCurve":
        shift = np.asarray(shift, dtype=float)
        return FourierCurve(self.n, tuple(np.asarray(self.a0) + shift), self.terms)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "a0": list(self.a0),
            "terms": [{"w": t.w, "a": t.a, "plane": list(t.plane)} for t in self.terms],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "FourierCurve":
        try:
            n = int(d["n"])
            a0 = d.get("a0", [0.0] * n)
            terms = tuple((t["w"], t["a"], tuple(t["plane"])) for t in d["terms"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad Fourier curve literal: {exc}") from exc
        return cls(n, a0, terms)


def parameters(N: int) -> np.ndarray:
    return 2 * np.pi * np.arange(N) / N


def sample_fourier(c: FourierCurve, N: int) -> DiscreteCurve:
    """Vertices ``C(2 pi k / N)``, ``k = 0..N-1``.

    Raises ``ResolutionError`` unless ``N >= 4 * max_frequency`` (and ``N >= 3``).
    """
    N = int(N)
    if N < 3 or N < 4 * c.max_frequency:
        raise ResolutionError(
            f"N = {N} undersamples a curve with max frequency {c.max_frequency}; "
            f"need N >= {max(3, 4 * c.max_frequency)}"
        )
    return DiscreteCurve(c.point(parameters(N)))


def edge_tangents(c: DiscreteCurve) -> np.ndarray:
    """Unit edge directions, shape ``(N, n)``; row k belongs to edge ``k -> k+1``."""
    e = c.edges()
    return e / np.linalg.norm(e, axis=1)[:, None]


def vertex_tangents(c: DiscreteCurve) -> np.ndarray:
    """Unit central-difference tangents ``(x[k+1] - x[k-1]) / |...|`` at vertices."""
    x = c.vertices
    d = np.roll(x, -1, axis=0) - np.roll(x, 1, axis=0)
    norms = np.linalg.norm(d, axis=1)
    # a vertex whose neighbours coincide has no central tangent; fall back to the edge
    bad = norms == 0
    if np.any(bad):
        d[bad] = c.edges()[bad]
        norms[bad] = np.linalg.norm(d[bad], axis=1)
    return d / norms[:, None]


def analytic_tangent(c: FourierCurve, s) -> np.ndarray:
    d = c.derivative(s, 1)
    return d / np.linalg.norm(d, axis=1)[:, None]


def analytic_curvature(c: FourierCurve, s) -> np.ndarray:
    """Curvature vector: normal part of ``C''`` divided by ``|C'|^2``.

    Returns shape ``(n,)`` for scalar ``s`` and ``(len(s), n)`` otherwise.
    """
    scalar = np.ndim(s) == 0
    d1 = c.derivative(s, 1)
    d2 = c.derivative(s, 2)
    speed2 = np.sum(d1 * d1, axis=1)
    tangential = np.sum(d1 * d2, axis=1) / speed2
    kappa = (d2 - tangential[:, None] * d1) / speed2[:, None]
    return kappa[0] if scalar else kappa


# standard curves -----------------------------------------------------------


def circle(radius: float = 1.0, n: int = 2, plane: tuple[int, int] = (0, 1), center=None) -> FourierCurve:
    """Round circle, counterclockwise in ``plane``."""
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    return FourierCurve(n, tuple(center), ((1, float(radius), tuple(plane)),))


def double_curve() -> FourierCurve:
    """``(e^{is}, e^{2is})`` in C^2 = R^4."""
    return FourierCurve(4, (0.0,) * 4, ((1, 1.0, (0, 1)), (2, 1.0, (2, 3))))


def star_curve(N: int, rng: np.random.Generator, r_min: float = 0.5, r_max: float = 1.5) -> DiscreteCurve:
    """Star-shaped polygon with vertex ``k`` at angle ``2 pi k / N`` and i.i.d. uniform radius."""
    theta = parameters(N)
    r = rng.uniform(r_min, r_max, size=N)
    return DiscreteCurve(np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1))


def resample_arclength(c: DiscreteCurve, N: int | None = None) -> DiscreteCurve:
    """Redistribute vertices at equal arclength along the polygon, keeping vertex 0."""
    N = c.N if N is None else int(N)
    x = c.vertices
    ell = c.edge_lengths()
    s = np.concatenate([[0.0], np.cumsum(ell)])
    t = np.arange(N) * s[-1] / N
    closed = np.vstack([x, x[:1]])
    return DiscreteCurve(np.stack([np.interp(t, s, closed[:, d]) for d in range(c.n)], axis=1))
