"""Constant 2-forms on R^n.

A constant 2-form is stored sparsely as a map from axis planes ``(i, j)``
with ``i < j`` to coefficients; planes that are absent carry coefficient 0.
The dense representation used for computation is the skew matrix ``A`` with
``A[i, j] = coeff(i, j)`` and ``A[j, i] = -coeff(i, j)``, so that
``form(u ^ v) = u @ A @ v``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import InputError


class AxisPlane(NamedTuple):
    """Oriented coordinate plane spanned by axes ``i < j`` (0-based)."""

    i: int
    j: int

    @classmethod
    def checked(cls, i, j, n: int) -> "AxisPlane":
        i, j = int(i), int(j)
        if not (0 <= i < j < n):
            raise InputError(f"axis plane ({i}, {j}) invalid for n = {n}; need 0 <= i < j < n")
        return cls(i, j)

    def key(self) -> str:
        return f"{self.i},{self.j}"


def axis_planes(n: int) -> list[AxisPlane]:
    """All ``C(n, 2)`` axis planes in lexicographic order."""
    return [AxisPlane(i, j) for i, j in combinations(range(n), 2)]


@dataclass(frozen=True)
class ConstantTwoForm:
    """Constant-coefficient 2-form ``sum_I coeffs[I] dx_I`` on R^n."""

    n: int
    coeffs: Mapping[AxisPlane, float] = field(default_factory=dict)

    def __post_init__(self):
        n = int(self.n)
        if n < 2:
            raise InputError(f"2-forms need n >= 2, got {n}")
        clean = {}
        for plane, value in dict(self.coeffs).items():
            plane = AxisPlane.checked(plane[0], plane[1], n)
            value = float(value)
            if not np.isfinite(value):
                raise InputError(f"non-finite coefficient on plane {tuple(plane)}")
            if value != 0.0:
                clean[plane] = value
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "coeffs", MappingProxyType(dict(sorted(clean.items()))))

    # constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "ConstantTwoForm":
        return cls(n, {})

    @classmethod
    def axis(cls, n: int, i: int, j: int, coeff: float = 1.0) -> "ConstantTwoForm":
        """``coeff * dx_i ^ dx_j``; ``i > j`` is accepted and flips the sign."""
        if i > j:
            i, j, coeff = j, i, -coeff
        return cls(n, {AxisPlane.checked(i, j, n): coeff})

    @classmethod
    def from_matrix(cls, A) -> "ConstantTwoForm":
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InputError("expected a square matrix")
        if not np.allclose(A, -A.T, atol=1e-12 * max(1.0, np.abs(A).max())):
            raise InputError("matrix is not skew-symmetric")
        n = A.shape[0]
        return cls(n, {p: A[p.i, p.j] for p in axis_planes(n)})

    # algebra --------------------------------------------------------------

    def __getitem__(self, plane) -> float:
        i, j = plane
        if i > j:
            return -self.coeffs.get(AxisPlane(j, i), 0.0)
        return self.coeffs.get(AxisPlane(i, j), 0.0)

    def matrix(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for (i, j), c in self.coeffs.items():
            A[i, j] = c
            A[j, i] = -c
        return A

    def __call__(self, u, v) -> float:
        """Evaluate on the bivector ``u ^ v``."""
        u = _vector(u, self.n)
        v = _vector(v, self.n)
        return float(u @ self.matrix() @ v)

    def __add__(self, other: "ConstantTwoForm") -> "ConstantTwoForm":
        if not isinstance(other, ConstantTwoForm):
            return NotImplemented
        if other.n != self.n:
            raise InputError(f"dimension mismatch: {self.n} vs {other.n}")
        out = dict(self.coeffs)
        for p, c in other.coeffs.items():
            out[p] = out.get(p, 0.0) + c
        return ConstantTwoForm(self.n, out)

    def __mul__(self, s) -> "ConstantTwoForm":
        s = float(s)
        return ConstantTwoForm(self.n, {p: s * c for p, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "ConstantTwoForm":
        return self * -1.0

    def __sub__(self, other: "ConstantTwoForm") -> "ConstantTwoForm":
        return self + (-other)

    def rotated(self, R) -> "ConstantTwoForm":
        """Push forward under the orthogonal map ``R`` (acts on Lambda^2 as ``R A R^T``)."""
        R = np.asarray(R, dtype=float)
        if R.shape != (self.n, self.n):
            raise InputError(f"rotation must be {self.n}x{self.n}")
        return ConstantTwoForm.from_matrix(R @ self.matrix() @ R.T)

    def allclose(self, other: "ConstantTwoForm", atol: float = 1e-12) -> bool:
        return self.n == other.n and np.allclose(self.matrix(), other.matrix(), rtol=0, atol=atol)

    # serialization --------------------------------------------------------

    def to_list(self) -> list[dict]:
        return [{"i": p.i, "j": p.j, "coeff": c} for p, c in self.coeffs.items()]

    @classmethod
    def from_list(cls, n: int, entries: Iterable[Mapping]) -> "ConstantTwoForm":
        coeffs: dict[AxisPlane, float] = {}
        try:
            for e in entries:
                i, j, c = int(e["i"]), int(e["j"]), float(e["coeff"])
                if i > j:
                    i, j, c = j, i, -c
                p = AxisPlane.checked(i, j, n)
                coeffs[p] = coeffs.get(p, 0.0) + c
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad form entry: {exc}") from exc
        return cls(n, coeffs)

    def to_dict(self) -> dict:
        return {"n": self.n, "entries": self.to_list()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ConstantTwoForm":
        try:
            return cls.from_list(int(d["n"]), d["entries"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad form literal: {exc}") from exc


def _vector(v, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (n,):
        raise InputError(f"expected a vector of length {n}, got shape {v.shape}")
    return v


def interior_product(omega: ConstantTwoForm, T) -> np.ndarray:
    """Covector ``v -> omega(T ^ v)``, returned as its component array."""
    T = _vector(T, omega.n)
    return T @ omega.matrix()


def comass(omega: ConstantTwoForm) -> float:
    """Largest value of ``omega(u ^ v)`` over orthonormal pairs ``u, v``.

    For a 2-form this is the top singular value of the skew coefficient
    matrix, so no optimization is needed.
    """
    if not omega.coeffs:
        return 0.0
    return float(np.linalg.svd(omega.matrix(), compute_uv=False)[0])
