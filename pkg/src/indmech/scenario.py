"""Reading and writing models as scenario files.

A scenario file is a single JSON object carrying the complete model:
variables, noise weights, mechanisms with flattened truth tables, the role
map, and the truncation flag.  Tables are flattened row-major over the
parent supports with the last parent varying fastest.  Unknown keys are
rejected everywhere, there are no references or includes, and floats travel
through JSON's shortest round-trip representation, so a dumped model parses
back to the identical law.

A file may also carry a ``calibration`` block with target moments.  With
explicit model sections the block is a postcondition, checked after
parsing; alone it asks for the calibrated trial model to be solved on load.
"""

from __future__ import annotations

import itertools
import json
import math
from pathlib import Path

from .errors import CalibrationError, ScenarioError, TruncatedOutcomeError
from .model import (
    FiniteVariable,
    Mechanism,
    NoiseSpec,
    StructuralModel,
    validate_model,
)
from . import zoo

_TOP_KEYS = {"name", "variables", "noise", "mechanisms", "roles", "truncation", "calibration"}
_MODEL_KEYS = ("variables", "noise", "mechanisms", "roles", "truncation")
_VAR_KEYS = {"name", "support", "kind"}
_MECH_KEYS = {"parents", "table"}
_CAL_KEYS = {"targets", "tolerance"}
_TARGET_KEYS = {"survival_a1", "survival_a0", "mean_y_a1", "mean_y_a0"}


def _reject_unknown(obj: dict, allowed: set[str], where: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ScenarioError(f"{where}: unknown key {key!r}")


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{where}: expected an integer, got {value!r}")
    return value


def _as_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: expected a number, got {value!r}")
    return float(value)


def parse_scenario(data) -> StructuralModel:
    """Build and validate a model from a decoded scenario object."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    _reject_unknown(data, _TOP_KEYS, "scenario")

    has_model = any(k in data for k in _MODEL_KEYS)
    if not has_model:
        if "calibration" not in data:
            raise ScenarioError(
                "scenario has neither model sections nor a calibration block"
            )
        targets, tolerance = _parse_calibration(data["calibration"])
        return zoo.build_adherence(targets, tolerance)

    for key in _MODEL_KEYS:
        if key not in data:
            raise ScenarioError(f"scenario: missing section {key!r}")

    if not isinstance(data["variables"], list):
        raise ScenarioError("variables: expected a list")
    variables = []
    for i, entry in enumerate(data["variables"]):
        where = f"variables[{i}]"
        if not isinstance(entry, dict):
            raise ScenarioError(f"{where}: expected an object")
        _reject_unknown(entry, _VAR_KEYS, where)
        for key in _VAR_KEYS:
            if key not in entry:
                raise ScenarioError(f"{where}: missing key {key!r}")
        if not isinstance(entry["support"], list) or not entry["support"]:
            raise ScenarioError(f"{where}: support must be a nonempty list")
        support = tuple(_as_int(c, f"{where}.support") for c in entry["support"])
        if entry["kind"] not in ("exogenous", "endogenous"):
            raise ScenarioError(f"{where}: kind must be exogenous or endogenous")
        variables.append(FiniteVariable(str(entry["name"]), support, entry["kind"]))
    by_name = {v.name: v for v in variables}

    if not isinstance(data["noise"], dict):
        raise ScenarioError("noise: expected an object")
    noise = {}
    for name, weights in data["noise"].items():
        if name not in by_name:
            raise ScenarioError(f"noise: unknown variable {name!r}")
        if not isinstance(weights, list):
            raise ScenarioError(f"noise.{name}: expected a list of weights")
        noise[name] = NoiseSpec(
            name, tuple(_as_number(w, f"noise.{name}") for w in weights)
        )

    if not isinstance(data["mechanisms"], dict):
        raise ScenarioError("mechanisms: expected an object")
    mechanisms = {}
    for name, entry in data["mechanisms"].items():
        where = f"mechanisms.{name}"
        if name not in by_name:
            raise ScenarioError(f"{where}: unknown variable")
        if not isinstance(entry, dict):
            raise ScenarioError(f"{where}: expected an object")
        _reject_unknown(entry, _MECH_KEYS, where)
        for key in _MECH_KEYS:
            if key not in entry:
                raise ScenarioError(f"{where}: missing key {key!r}")
        parents = entry["parents"]
        if not isinstance(parents, list):
            raise ScenarioError(f"{where}.parents: expected a list")
        for p in parents:
            if p not in by_name:
                raise ScenarioError(f"{where}.parents: unknown variable {p!r}")
        flat = entry["table"]
        if not isinstance(flat, list):
            raise ScenarioError(f"{where}.table: expected a list")
        supports = [by_name[p].support for p in parents]
        expected = math.prod(len(s) for s in supports)
        if len(flat) != expected:
            raise ScenarioError(
                f"{where}.table: {len(flat)} entries, expected {expected} "
                "(row-major over the parent supports, last parent fastest)"
            )
        table = {}
        for combo, out in zip(itertools.product(*supports), flat):
            table[combo] = _as_int(out, f"{where}.table")
        mechanisms[name] = Mechanism(
            target=name, parents=tuple(parents), table=table
        )

    if not isinstance(data["roles"], dict):
        raise ScenarioError("roles: expected an object")
    roles = {}
    for role, var in data["roles"].items():
        if not isinstance(var, str):
            raise ScenarioError(f"roles.{role}: expected a variable name")
        roles[str(role)] = var

    if not isinstance(data["truncation"], bool):
        raise ScenarioError("truncation: expected true or false")

    model = StructuralModel(
        variables=tuple(variables),
        noise=noise,
        mechanisms=mechanisms,
        roles=roles,
        truncation=data["truncation"],
    )
    report = validate_model(model)
    if not report.ok:
        raise ScenarioError(
            "scenario does not describe a valid model: " + "; ".join(report.errors)
        )

    if "calibration" in data:
        targets, tolerance = _parse_calibration(data["calibration"])
        try:
            moments = zoo.calibration_moments(model)
        except TruncatedOutcomeError:
            raise CalibrationError(
                "scenario model misses its calibration targets: its outcome "
                "is undefined among units with the event, so the arm means "
                "do not exist"
            ) from None
        residuals = {
            key: abs(moments[key] - want) for key, want in targets.as_dict().items()
        }
        if max(residuals.values()) > tolerance:
            raise CalibrationError(
                "scenario model misses its calibration targets",
                residuals=residuals,
            )
    return model


def _parse_calibration(entry) -> tuple[zoo.CalibrationTargets, float]:
    if not isinstance(entry, dict):
        raise ScenarioError("calibration: expected an object")
    _reject_unknown(entry, _CAL_KEYS, "calibration")
    if "targets" not in entry:
        raise ScenarioError("calibration: missing key 'targets'")
    targets = entry["targets"]
    if not isinstance(targets, dict):
        raise ScenarioError("calibration.targets: expected an object")
    _reject_unknown(targets, _TARGET_KEYS, "calibration.targets")
    for key in _TARGET_KEYS:
        if key not in targets:
            raise ScenarioError(f"calibration.targets: missing moment {key!r}")
    tolerance = 1e-6
    if "tolerance" in entry:
        tolerance = _as_number(entry["tolerance"], "calibration.tolerance")
    return (
        zoo.CalibrationTargets(
            survival_a1=_as_number(targets["survival_a1"], "survival_a1"),
            survival_a0=_as_number(targets["survival_a0"], "survival_a0"),
            mean_y_a1=_as_number(targets["mean_y_a1"], "mean_y_a1"),
            mean_y_a0=_as_number(targets["mean_y_a0"], "mean_y_a0"),
        ),
        tolerance,
    )


def load_scenario(path) -> StructuralModel:
    """Parse a scenario file; ScenarioError on any schema or syntax problem."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"not valid JSON: {exc}") from None
    return parse_scenario(data)


def dump_scenario(
    model: StructuralModel,
    name: str | None = None,
    calibration: zoo.CalibrationTargets | None = None,
    tolerance: float = 1e-6,
) -> str:
    """Serialize a model (optionally with its calibration targets) to JSON text."""
    data: dict = {}
    if name:
        data["name"] = name
    data["variables"] = [
        {"name": v.name, "support": list(v.support), "kind": v.kind}
        for v in model.variables
    ]
    data["noise"] = {
        v.name: list(model.noise[v.name].weights) for v in model.exogenous()
    }
    mechanisms = {}
    for v in model.endogenous():
        mech = model.mechanisms[v.name]
        supports = [model.variable(p).support for p in mech.parents]
        flat = [mech.table[combo] for combo in itertools.product(*supports)]
        mechanisms[v.name] = {"parents": list(mech.parents), "table": flat}
    data["mechanisms"] = mechanisms
    data["roles"] = dict(model.roles)
    data["truncation"] = model.truncation
    if calibration is not None:
        data["calibration"] = {
            "targets": calibration.as_dict(),
            "tolerance": tolerance,
        }
    return json.dumps(data, indent=2) + "\n"
