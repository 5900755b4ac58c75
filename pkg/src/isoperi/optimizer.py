"""Length minimization under prescribed multi-volume or omega-volume.

The iteration works on the constraint set itself:

1. project the start onto ``{V = target}`` with Newton steps along the
   Jacobian row space;
2. take a descent step in the constraint-tangent space;
3. re-project and accept the step by Armijo backtracking on length.

Two direction policies are available. ``"gradient"`` is the projected
gradient with Barzilai-Borwein trial steps. ``"newton"`` (default) rescales
the projected gradient by the Lagrangian Hessian restricted to the tangent
space, with eigenvalues replaced by their absolute values and a
Levenberg-Marquardt shift. Near a minimizer it behaves like Newton's method.
Near a saddle it still moves downhill along negative-curvature directions.

On return the multipliers are the least-squares solution of
``grad L = sum_I lambda_I grad V_I`` over the constrained planes.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Mapping, Sequence

import numpy as np

from .curves import DiscreteCurve, resample_arclength
from .errors import DegeneracyError, InputError, ProjectionError
from .forms import AxisPlane, ConstantTwoForm
from .functionals import (
    jacobian_matrix,
    length,
    length_gradient,
    length_hessian,
    multi_volume,
    omega_volume,
    omega_volume_gradient,
    two_form_volume_hessian,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConstraintSet:
    """Prescribed multi-volume components or a single omega-volume.

    Build with :meth:`multi_volume` or :meth:`omega_volume`.
    """

    kind: str
    n: int
    planes: tuple[AxisPlane, ...] = ()
    targets: tuple[float, ...] = ()
    form: ConstantTwoForm | None = None

    def __post_init__(self):
        if self.kind not in ("multi_volume", "omega_volume"):
            raise InputError(f"unknown constraint kind {self.kind!r}")
        if not all(np.isfinite(self.targets)):
            raise InputError("constraint targets must be finite")
        if self.kind == "multi_volume":
            if not self.planes:
                raise InputError("at least one constraint is required")
            if len(set(self.planes)) != len(self.planes):
                raise InputError("constrained planes must be distinct")
            if len(self.planes) != len(self.targets):
                raise InputError("one target per plane")
        else:
            if self.form is None or len(self.targets) != 1:
                raise InputError("omega-volume constraint needs one form and one target")
            if not self.form.coeffs:
                raise InputError("omega-volume constraint needs a nonzero form")

    @classmethod
    def multi_volume(cls, n: int, items: Sequence) -> "ConstraintSet":
        """``items``: ``(plane, target)`` pairs, or a mapping plane -> target."""
        if isinstance(items, Mapping):
            items = list(items.items())
        planes, targets = [], []
        for plane, target in items:
            planes.append(AxisPlane.checked(plane[0], plane[1], n))
            targets.append(float(target))
        return cls("multi_volume", int(n), tuple(planes), tuple(targets))

    @classmethod
    def omega_volume(cls, form: ConstantTwoForm, target: float) -> "ConstraintSet":
        return cls("omega_volume", form.n, (), (float(target),), form)

    @classmethod
    def matching(cls, c: DiscreteCurve, planes=None) -> "ConstraintSet":
        """Constrain the listed planes (default: all) to the current values of ``c``."""
        mv = multi_volume(c, planes)
        return cls.multi_volume(c.n, list(mv.values.items()))

    @property
    def size(self) -> int:
        return len(self.targets)

    @property
    def labels(self) -> list:
        return list(self.planes) if self.kind == "multi_volume" else ["omega"]

    def values(self, c: DiscreteCurve) -> np.ndarray:
        self._check(c)
        if self.kind == "multi_volume":
            mv = multi_volume(c)
            return np.array([mv[p] for p in self.planes])
        return np.array([omega_volume(c, self.form)])

    def violation(self, c: DiscreteCurve) -> np.ndarray:
        return self.values(c) - np.asarray(self.targets)

    def jacobian(self, c: DiscreteCurve) -> np.ndarray:
        """Constraint gradients as rows, shape ``(size, N*n)``."""
        self._check(c)
        if self.kind == "multi_volume":
            return jacobian_matrix(c, self.planes)
        return omega_volume_gradient(c, self.form).ravel()[None, :]

    def hessians(self, N: int) -> list[np.ndarray]:
        """Constant Hessians of the (quadratic) constraint functions."""
        return [two_form_volume_hessian(A, N) for A in self._matrices()]

    def _matrices(self) -> list[np.ndarray]:
        if self.kind == "multi_volume":
            return [ConstantTwoForm.axis(self.n, *p).matrix() for p in self.planes]
        return [self.form.matrix()]

    def lagrangian_form(self, multipliers) -> ConstantTwoForm:
        """Assemble multipliers into the 2-form ``sum_I lambda_I dx_I``."""
        multipliers = np.atleast_1d(np.asarray(multipliers, dtype=float))
        if self.kind == "multi_volume":
            return ConstantTwoForm(self.n, dict(zip(self.planes, multipliers)))
        return float(multipliers[0]) * self.form

    def with_targets(self, targets) -> "ConstraintSet":
        return ConstraintSet(self.kind, self.n, self.planes, tuple(float(t) for t in targets), self.form)

    def scaled_targets(self, factor: float) -> "ConstraintSet":
        return self.with_targets([factor * t for t in self.targets])

    def rotated(self, R) -> "ConstraintSet":
        """Constraints satisfied by ``R c`` whenever ``c`` satisfies these."""
        R = np.asarray(R, dtype=float)
        if self.kind == "omega_volume":
            return ConstraintSet.omega_volume(self.form.rotated(R), self.targets[0])
        if len(self.planes) != self.n * (self.n - 1) // 2:
            raise InputError("rotating a multi-volume constraint needs every plane constrained")
        M = np.zeros((self.n, self.n))
        for p, t in zip(self.planes, self.targets):
            M[p.i, p.j], M[p.j, p.i] = t, -t
        M = R @ M @ R.T
        return ConstraintSet.multi_volume(self.n, [(p, M[p.i, p.j]) for p in self.planes])

    def _check(self, c: DiscreteCurve):
        if c.n != self.n:
            raise InputError(f"constraints live in R^{self.n} but curve is in R^{c.n}")

    def to_dict(self) -> dict:
        if self.kind == "multi_volume":
            return {
                "n": self.n,
                "multi_volume": [{"plane": [p.i, p.j], "target": t} for p, t in zip(self.planes, self.targets)],
            }
        return {"n": self.n, "omega_volume": {"form": self.form.to_list(), "target": self.targets[0]}}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ConstraintSet":
        try:
            n = int(d["n"])
            if "multi_volume" in d:
                return cls.multi_volume(n, [(e["plane"], e["target"]) for e in d["multi_volume"]])
            if "omega_volume" in d:
                entry = d["omega_volume"]
                return cls.omega_volume(ConstantTwoForm.from_list(n, entry["form"]), entry["target"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad constraint literal: {exc}") from exc
        raise InputError("constraint literal needs a 'multi_volume' or 'omega_volume' entry")


@dataclass
class OptimizerConfig:
    tol_c: float = 1e-8
    tol_g: float = 1e-4
    max_iter: int = 20000
    seed: int | None = None
    step: str = "newton"
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 40
    # first trial step of the gradient policy; None means 1/N
    initial_step: float | None = None
    # remesh by arclength when the shortest edge drops below this fraction of the mean
    remesh_ratio: float = 0.05
    max_projection_iter: int = 50

    def __post_init__(self):
        if self.step not in ("newton", "gradient"):
            raise InputError(f"step policy must be 'newton' or 'gradient', got {self.step!r}")
        if not (self.tol_c > 0 and self.tol_g > 0):
            raise InputError("tolerances must be positive")
        if int(self.max_iter) < 0:
            raise InputError("max_iter must be nonnegative")
        if not (0 < self.backtrack < 1 and 0 < self.armijo_c < 1):
            raise InputError("Armijo parameters out of range")
        if not 0 <= self.remesh_ratio < 1:
            raise InputError("remesh_ratio must lie in [0, 1)")

    @classmethod
    def from_dict(cls, d: Mapping | None) -> "OptimizerConfig":
        d = dict(d or {})
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InputError(f"unknown optimizer config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise InputError(str(exc)) from exc


@dataclass
class TraceEntry:
    iteration: int
    length: float
    violation: float
    residual: float
    step: float
    event: str = "step"


@dataclass
class OptimizationReport:
    final_curve: DiscreteCurve
    multipliers: ConstantTwoForm
    constraint_violation: float
    relative_length_gradient_residual: float
    iterations: int
    converged: bool
    trace: list[TraceEntry] = field(default_factory=list)
    message: str = ""

    @property
    def length(self) -> float:
        return length(self.final_curve)

    def to_dict(self, include_curve: bool = True) -> dict:
        d = {
            "converged": self.converged,
            "iterations": self.iterations,
            "length": self.length,
            "constraint_violation": self.constraint_violation,
            "relative_length_gradient_residual": self.relative_length_gradient_residual,
            "multipliers": self.multipliers.to_list(),
            "message": self.message,
            "trace": [asdict(t) for t in self.trace],
        }
        if include_curve:
            d["final_curve"] = self.final_curve.to_dict()
        return d

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "length", "violation", "residual", "step", "event"])
        for t in self.trace:
            w.writerow([t.iteration, repr(t.length), repr(t.violation), repr(t.residual), repr(t.step), t.event])
        return buf.getvalue()


def _rank_check(J: np.ndarray, c: DiscreteCurve, labels) -> None:
    if J.shape[0] == 0:
        return
    U, sv, _ = np.linalg.svd(J, full_matrices=False)
    # a healthy row of the area Jacobian has norm ~ sqrt(N) * edge length
    scale = np.sqrt(c.N) * float(np.mean(c.edge_lengths()))
    small = sv <= 1e-10 * max(scale, sv.max())
    if np.any(small):
        weights = np.abs(U[:, small]).max(axis=1)
        involved = [tuple(lbl) if isinstance(lbl, AxisPlane) else lbl for lbl, wt in zip(labels, weights) if wt > 1e-3]
        raise DegeneracyError(f"constraint Jacobian is rank deficient (planes {involved})", involved)


def project_to_constraints(c: DiscreteCurve, cs: ConstraintSet, tol: float = 1e-8, max_iter: int = 50) -> DiscreteCurve:
    """Newton projection onto ``{V = target}``, moving only along the Jacobian row space.

    Each step is the minimum-norm correction ``-J^T (J J^T)^{-1} r``.
    Raises ``DegeneracyError`` when ``J`` loses rank and ``ProjectionError``
    when ``max_iter`` steps do not reach ``|r| <= tol``.
    """
    x = c
    targets = np.asarray(cs.targets)
    for _ in range(max_iter + 1):
        r = cs.values(x) - targets
        if np.abs(r).max() <= tol:
            return x
        J = cs.jacobian(x)
        _rank_check(J, x, cs.labels)
        delta = J.T @ np.linalg.solve(J @ J.T, r)
        y = x.vertices - delta.reshape(x.vertices.shape)
        try:
            x = DiscreteCurve(y)
        except InputError as exc:
            raise ProjectionError(f"projection produced an invalid curve: {exc}") from exc
    raise ProjectionError(f"projection did not reach tolerance {tol} in {max_iter} iterations (|r| = {np.abs(r).max():.3g})")


def _kkt(c: DiscreteCurve, cs: ConstraintSet):
    g = length_gradient(c).ravel()
    J = cs.jacobian(c)
    lam = np.linalg.solve(J @ J.T, J @ g)
    pg = g - J.T @ lam
    gnorm = np.linalg.norm(g)
    res = float(np.linalg.norm(pg) / gnorm) if gnorm > 0 else 0.0
    return g, J, lam, pg, res


def _tangent_eigensystem(c: DiscreteCurve, cs: ConstraintSet, J, lam, con_hessians):
    """Eigenpairs of the Lagrangian Hessian compressed to the tangent space."""
    H = length_hessian(c) - sum(l * Hc for l, Hc in zip(lam, con_hessians))
    Q, _ = np.linalg.qr(J.T)
    PH = H - Q @ (Q.T @ H)
    PHP = PH - (PH @ Q) @ Q.T
    big = 10.0 * np.abs(H).max()
    w, U = np.linalg.eigh(PHP + big * (Q @ Q.T))
    return w, U


class _Stalled(Exception):
    pass


def minimize_length(c0: DiscreteCurve, cs: ConstraintSet, config: OptimizerConfig | Mapping | None = None) -> OptimizationReport:
    """Minimize polygon length subject to ``cs``.

    Returns an :class:`OptimizationReport`. ``converged`` means both
    ``violation <= tol_c`` and the relative KKT residual
    ``|grad L - J^T lambda| / |grad L| <= tol_g`` hold.
    """
    if not isinstance(config, OptimizerConfig):
        config = OptimizerConfig.from_dict(config)
    cfg = config
    cs._check(c0)
    proj_tol = 0.1 * cfg.tol_c

    def project(curve):
        return project_to_constraints(curve, cs, tol=proj_tol, max_iter=cfg.max_projection_iter)

    x = project(c0)
    L = length(x)
    con_hessians = cs.hessians(x.N) if cfg.step == "newton" else None
    trace: list[TraceEntry] = []
    alpha_prev = None
    prev = None
    mu = None
    message = ""
    converged = False
    it = 0

    def trial(direction, a):
        try:
            y = project(DiscreteCurve(x.vertices + a * direction.reshape(x.vertices.shape)))
        except (ProjectionError, DegeneracyError, InputError, np.linalg.LinAlgError):
            return None, np.inf
        ell = y.edge_lengths()
        if ell.min() < 1e-3 * ell.mean():
            return None, np.inf
        return y, length(y)

    for it in range(cfg.max_iter + 1):
        if cfg.remesh_ratio > 0:
            ell = x.edge_lengths()
            if ell.min() < cfg.remesh_ratio * ell.mean():
                x = project(resample_arclength(x))
                L = length(x)
                prev = None
                trace.append(TraceEntry(it, L, float(np.abs(cs.violation(x)).max()), np.nan, 0.0, "remesh"))
        g, J, lam, pg, res = _kkt(x, cs)
        viol = float(np.abs(cs.violation(x)).max())
        if res <= cfg.tol_g and viol <= cfg.tol_c:
            converged = True
            message = "converged"
            trace.append(TraceEntry(it, L, viol, res, 0.0, "converged"))
            break
        if it == cfg.max_iter:
            message = "max_iter exhausted"
            trace.append(TraceEntry(it, L, viol, res, 0.0, "stop"))
            break
        try:
            if cfg.step == "newton":
                x_new, L_new, a, mu = _newton_step(x, L, cs, J, lam, pg, con_hessians, mu, trial, cfg)
            else:
                if prev is not None:
                    s = x.vertices.ravel() - prev[0]
                    y = pg - prev[1]
                    sy = s @ y
                    a0 = (s @ s) / sy if sy > 0 else alpha_prev
                else:
                    a0 = cfg.initial_step if cfg.initial_step is not None else 1.0 / x.N
                prev = (x.vertices.ravel().copy(), pg.copy())
                x_new, L_new, a = _armijo(-pg, pg, a0, L, trial, cfg)
                alpha_prev = a
        except _Stalled as exc:
            message = f"stalled: {exc}"
            trace.append(TraceEntry(it, L, viol, res, 0.0, "stalled"))
            break
        trace.append(TraceEntry(it, L_new, float(np.abs(cs.violation(x_new)).max()), res, a, "step"))
        x, L = x_new, L_new

    g, J, lam, pg, res = _kkt(x, cs)
    viol = float(np.abs(cs.violation(x)).max())
    converged = converged and res <= cfg.tol_g and viol <= cfg.tol_c
    log.debug("minimize_length: %s after %d iterations, L = %.12g, residual = %.3g", message, it, L, res)
    return OptimizationReport(
        final_curve=x,
        multipliers=cs.lagrangian_form(lam),
        constraint_violation=viol,
        relative_length_gradient_residual=res,
        iterations=it,
        converged=converged,
        trace=trace,
        message=message,
    )


def _armijo(direction, pg, a0, L, trial, cfg):
    slope = pg @ direction
    a = a0
    for _ in range(cfg.max_backtracks):
        y, Ly = trial(direction, a)
        if y is not None and Ly <= L + cfg.armijo_c * a * slope:
            return y, Ly, a
        a *= cfg.backtrack
    raise _Stalled("Armijo backtracking failed")


def _newton_step(x, L, cs, J, lam, pg, con_hessians, mu, trial, cfg):
    w, U = _tangent_eigensystem(x, cs, J, lam, con_hessians)
    wabs = np.abs(w)
    wmax = wabs.max()
    if mu is None:
        mu = 1e-2 * wmax
    coeffs = U.T @ pg
    while mu <= 1e8 * wmax:
        d = -(U @ (coeffs / (wabs + mu)))
        slope = pg @ d
        for a in (1.0, 0.5, 0.25):
            y, Ly = trial(d, a)
            if y is not None and Ly <= L + cfg.armijo_c * a * slope:
                return y, Ly, a, mu / 3.0
        mu = max(10.0 * mu, 1e-12 * wmax)
    # damping exhausted: fall back to a plain projected gradient step
    y, Ly, a = _armijo(-pg, pg, 1.0 / x.N, L, trial, cfg)
    return y, Ly, a, 1e-2 * wmax
