"""Scenario runner: ``isoperi <command> --scenario file.json [--out dir] [--seed int]``.

Exit codes are 0 on success, 2 on input errors and 3 on numerical errors.
Errors are reported on stderr as one JSON object. Every scenario is parsed
and validated before any computation starts, and report files are written
only after the computation succeeds, so a failing run leaves no partial
output behind.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .calibration import PolynomialOneForm, Region, verify_certificate
from .curves import DiscreteCurve, FourierCurve, sample_fourier
from .errors import DegeneracyError, InputError, IsoperiError, NumericalError
from .forms import ConstantTwoForm
from .functionals import h_zero, length, multi_volume, omega_volume, spanning_volume_bracket, stationarity_fit
from .optimizer import ConstraintSet, OptimizerConfig, minimize_length
from .stability import constrained_hessian_spectrum

COMMANDS = ("eval", "minimize", "spectrum", "calibrate", "sweep")
EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3
SWEEP_COLUMNS = ["target_volume", "length", "converged", "iterations", "residual"]


# sweep ---------------------------------------------------------------------


@dataclass
class SweepRow:
    target_volume: float
    length: float
    converged: bool
    iterations: int
    residual: float
    message: str = ""


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in self.rows:
            w.writerow([repr(r.target_volume), repr(r.length), str(r.converged).lower(), r.iterations, repr(r.residual)])
        return buf.getvalue()

    @property
    def lengths(self) -> np.ndarray:
        return np.array([r.length for r in self.rows])


def sweep_profile(
    c0: DiscreteCurve,
    base: ConstraintSet,
    targets: Sequence[float],
    config: OptimizerConfig | Mapping | None = None,
    warm_start: bool = True,
) -> SweepResult:
    """Least length found for each prescribed volume.

    Each run starts from the previous solution (or from ``c0`` when
    ``warm_start`` is false) scaled by ``sqrt(V_target / V_current)``, which
    lands exactly on the new constraint because every ``V_I`` is quadratic.
    A run that fails is recorded with ``converged = false`` and the sweep
    moves on from the last good curve.
    """
    if base.size != 1:
        raise InputError("a sweep varies a single constraint")
    targets = [float(t) for t in targets]
    if any(not (t > 0 and math.isfinite(t)) for t in targets):
        raise InputError("sweep targets must be positive")
    if any(b < a for a, b in zip(targets, targets[1:])):
        raise InputError("sweep targets must be sorted")
    if not isinstance(config, OptimizerConfig):
        config = OptimizerConfig.from_dict(config)
    v0 = float(base.values(c0)[0])
    if not v0 > 0:
        raise InputError("the start curve must enclose positive volume for the swept constraint")
    out = SweepResult()
    current = c0
    for t in targets:
        start = current if warm_start else c0
        vs = float(base.values(start)[0])
        start = start.scaled(math.sqrt(t / vs))
        try:
            rep = minimize_length(start, base.with_targets([t]), config)
        except NumericalError as exc:
            out.rows.append(SweepRow(t, math.nan, False, 0, math.nan, str(exc)))
            continue
        out.rows.append(
            SweepRow(t, rep.length, rep.converged, rep.iterations, rep.relative_length_gradient_residual, rep.message)
        )
        current = rep.final_curve
    return out


# scenario parsing ----------------------------------------------------------


@dataclass
class Scenario:
    command: str
    path: Path
    data: dict
    seed: int

    @property
    def base_dir(self) -> Path:
        return self.path.parent

    @property
    def params(self) -> dict:
        p = self.data.get("params", {})
        if not isinstance(p, dict):
            raise InputError("'params' must be an object")
        return p

    def output_name(self, default: str) -> str:
        name = self.data.get("output", default)
        if not isinstance(name, str) or not name or Path(name).name != name:
            raise InputError("'output' must be a plain file name")
        return name


def _read_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise InputError(f"file not found: {path}") from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _resolve(sc: Scenario, value):
    """A scenario entry is either inline JSON or a path relative to the scenario file."""
    if isinstance(value, str):
        return _read_json(sc.base_dir / value)
    return value


def load_scenario(path, command: str, seed: int | None = None) -> Scenario:
    if command not in COMMANDS:
        raise InputError(f"unknown command {command!r}")
    path = Path(path)
    data = _read_json(path)
    if not isinstance(data, dict):
        raise InputError("scenario must be a JSON object")
    declared = data.get("command")
    if declared is not None and declared != command:
        raise InputError(f"scenario is for {declared!r}, not {command!r}")
    if seed is None:
        seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise InputError("seed must be an integer")
    return Scenario(command, path, data, seed)


def _load_curve(sc: Scenario, key: str = "curve"):
    """Returns ``(polygon, fourier_or_None)``."""
    if key not in sc.data:
        raise InputError(f"scenario needs a '{key}' entry")
    d = _resolve(sc, sc.data[key])
    if not isinstance(d, dict):
        raise InputError("curve literal must be an object")
    if "terms" in d:
        fc = FourierCurve.from_dict(d)
        N = sc.data.get("N", d.get("N"))
        if N is None:
            raise InputError("a Fourier curve needs a sample count 'N'")
        return sample_fourier(fc, int(N)), fc
    return DiscreteCurve.from_dict(d), None


def _perturbed(sc: Scenario, c: DiscreteCurve) -> DiscreteCurve:
    pert = sc.data.get("perturb")
    if pert is None:
        return c
    if not isinstance(pert, dict):
        raise InputError("'perturb' must be an object")
    rng = np.random.default_rng(sc.seed)
    kind = pert.get("kind")
    x = c.vertices
    if kind == "star":
        lo, hi = float(pert.get("r_min", 0.5)), float(pert.get("r_max", 1.5))
        if not 0 < lo <= hi:
            raise InputError("star perturbation needs 0 < r_min <= r_max")
        center = x.mean(axis=0)
        r = rng.uniform(lo, hi, size=c.N)
        return DiscreteCurve(center + r[:, None] * (x - center))
    if kind == "noise":
        scale = float(pert.get("scale", 1e-2))
        if not scale >= 0:
            raise InputError("noise scale must be nonnegative")
        return DiscreteCurve(x + scale * rng.normal(size=x.shape))
    raise InputError(f"unknown perturbation kind {kind!r}")


def _load_constraints(sc: Scenario, c: DiscreteCurve) -> ConstraintSet:
    if "constraints" not in sc.data:
        raise InputError("scenario needs a 'constraints' entry")
    d = _resolve(sc, sc.data["constraints"])
    if not isinstance(d, dict):
        raise InputError("constraint literal must be an object")
    if "match" in d:
        planes = d["match"]
        return ConstraintSet.matching(c, None if planes == "all" else [tuple(p) for p in planes])
    return ConstraintSet.from_dict(d)


def _load_two_form(sc: Scenario, n: int) -> ConstantTwoForm | None:
    if "form" not in sc.data:
        return None
    d = _resolve(sc, sc.data["form"])
    if isinstance(d, dict):
        return ConstantTwoForm.from_dict(d)
    return ConstantTwoForm.from_list(n, d)


def _load_one_form(sc: Scenario, n: int) -> PolynomialOneForm:
    if "form" not in sc.data:
        raise InputError("calibrate needs a 'form' entry")
    d = _resolve(sc, sc.data["form"])
    if isinstance(d, dict):
        return PolynomialOneForm.from_list(int(d.get("n", n)), d.get("monomials", []))
    return PolynomialOneForm.from_list(n, d)


# commands ------------------------------------------------------------------


def _cmd_eval(sc: Scenario):
    c, fc = _load_curve(sc)
    form = _load_two_form(sc, c.n)

    def run():
        mv = multi_volume(c)
        fit = stationarity_fit(c)
        bracket = spanning_volume_bracket(c)
        rep = {
            "N": c.N,
            "n": c.n,
            "length": length(c),
            "multi_volume": mv.to_dict(),
            "volume_bracket": bracket.to_dict(),
            "h_zero": list(h_zero(c, bracket)) if bracket.lower > 0 else None,
            "stationarity_fit": {
                "form": fit.form.to_list(),
                "residual": fit.residual,
                "rank": fit.rank,
                "degenerate": fit.degenerate,
            },
        }
        if form is not None:
            rep["omega_volume"] = omega_volume(c, form)
        return {sc.output_name("eval.json"): rep}

    return run


def _cmd_minimize(sc: Scenario):
    base, _ = _load_curve(sc)
    cs = _load_constraints(sc, base)
    c0 = _perturbed(sc, base)
    params = dict(sc.params)
    params.setdefault("seed", sc.seed)
    cfg = OptimizerConfig.from_dict(params)
    name = sc.output_name("minimize.json")

    def run():
        rep = minimize_length(c0, cs, cfg)
        d = rep.to_dict()
        d["seed"] = sc.seed
        d["constraints"] = cs.to_dict()
        return {name: d, Path(name).stem + "_trace.csv": rep.trace_csv()}

    return run


def _cmd_spectrum(sc: Scenario):
    c, _ = _load_curve(sc)
    cs = _load_constraints(sc, c)
    p = sc.params
    unknown = set(p) - {"tol_g", "tol", "h"}
    if unknown:
        raise InputError(f"unknown spectrum params: {sorted(unknown)}")

    def run():
        rep = constrained_hessian_spectrum(c, cs, tol_g=float(p.get("tol_g", 1e-4)), tol=p.get("tol"), h=p.get("h"))
        return {sc.output_name("spectrum.json"): rep.to_dict()}

    return run


def _cmd_calibrate(sc: Scenario):
    c, fc = _load_curve(sc)
    omega = _load_one_form(sc, c.n)
    p = sc.params
    if "region" not in p:
        raise InputError("calibrate needs params.region")
    region = Region.from_dict(p["region"])
    samples = int(p.get("samples", 101))
    tol = float(p.get("tol", 1e-6))
    target = fc if fc is not None else c
    npts = c.N

    def run():
        cert = verify_certificate(omega, region, target, samples=samples, tol=tol, curve_points=npts)
        return {sc.output_name("calibrate.json"): cert.to_dict()}

    return run


def _cmd_sweep(sc: Scenario):
    base, _ = _load_curve(sc)
    cs = _load_constraints(sc, base)
    c0 = _perturbed(sc, base)
    p = dict(sc.params)
    targets = p.pop("targets", None)
    if not isinstance(targets, list):
        raise InputError("sweep needs params.targets as a list")
    warm = bool(p.pop("warm_start", True))
    p.setdefault("seed", sc.seed)
    cfg = OptimizerConfig.from_dict(p)
    name = sc.output_name("sweep.csv")
    if cs.size != 1:
        raise InputError("a sweep varies a single constraint")
    if any(not isinstance(t, (int, float)) or isinstance(t, bool) for t in targets):
        raise InputError("sweep targets must be numbers")

    def run():
        if not targets:
            return {name: SweepResult().to_csv()}
        res = sweep_profile(c0, cs, targets, cfg, warm_start=warm)
        return {name: res.to_csv()}

    return run


HANDLERS = {
    "eval": _cmd_eval,
    "minimize": _cmd_minimize,
    "spectrum": _cmd_spectrum,
    "calibrate": _cmd_calibrate,
    "sweep": _cmd_sweep,
}


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _jsonable(obj.item())
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def run_scenario(command: str, scenario_path, out_dir=".", seed: int | None = None) -> dict[str, Path]:
    """Parse, run and write one scenario. Returns the written files by name.

    Raises ``InputError`` or ``NumericalError`` without touching ``out_dir``.
    """
    sc = load_scenario(scenario_path, command, seed)
    try:
        job = HANDLERS[command](sc)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, IsoperiError):
            raise
        raise InputError(f"bad scenario: {exc}") from exc
    outputs = job()
    out = Path(out_dir)
    rendered = {}
    for name, payload in outputs.items():
        if isinstance(payload, str):
            rendered[name] = payload
        else:
            rendered[name] = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for name, text in rendered.items():
        (out / name).write_text(text)
        written[name] = out / name
    return written


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _report_error("InputError", message, EXIT_INPUT)
        raise SystemExit(EXIT_INPUT)


def _report_error(kind: str, message: str, code: int, **extra):
    payload = {"error": kind, "message": message, "exit_code": code}
    payload.update(extra)
    sys.stderr.write(json.dumps(_jsonable(payload), sort_keys=True) + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="isoperi", description="Isoperimetric experiments on closed curves in R^n.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", default=".", help="directory for report files (default: current directory)")
    p.add_argument("--seed", type=int, default=None, help="overrides the scenario seed")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        written = run_scenario(args.command, args.scenario, args.out, args.seed)
    except InputError as exc:
        _report_error(type(exc).__name__, str(exc), EXIT_INPUT)
        return EXIT_INPUT
    except DegeneracyError as exc:
        _report_error(type(exc).__name__, str(exc), EXIT_NUMERICAL, planes=[list(p) if isinstance(p, tuple) else p for p in exc.planes])
        return EXIT_NUMERICAL
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        _report_error(type(exc).__name__, str(exc), EXIT_NUMERICAL)
        return EXIT_NUMERICAL
    for name in written:
        print(written[name])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
