"""Finite structural causal models in response-function form.

A model is a list of finite variables, a probability weight vector for every
exogenous variable, and a total truth table for every endogenous one.  All
randomness lives in the exogenous variables; mechanisms are deterministic.
Counterfactuals are therefore well defined configuration by configuration,
which is what the enumeration engine in :mod:`indmech.worlds` exploits.

Variables are tied to causal roles (treatment ``A``, event ``D``, outcome
``Y``, and optionally the treatment components ``A_D``/``A_Y``, the event
precursor ``D_A``, the common cause ``U``, a covariate ``L``, and a product
indicator ``M``) through the model's role map.  Roles, not variable names,
are what the estimands, audits, and identification functionals consume.
"""

from __future__ import annotations

import graphlib
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .errors import RoleError

WEIGHT_TOL = 1e-12

ROLE_NAMES = ("A", "D", "Y", "A_D", "A_Y", "D_A", "U", "L", "M")
REQUIRED_ROLES = ("A", "D", "Y")
# Roles whose variables must be binary 0/1.
_BINARY_ROLES = ("A", "D", "A_D", "A_Y", "D_A", "M")


@dataclass(frozen=True)
class FiniteVariable:
    """A named variable with a finite ordered support of integer codes."""

    name: str
    support: tuple[int, ...]
    kind: str  # "exogenous" or "endogenous"

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(int(c) for c in self.support))


@dataclass(frozen=True)
class NoiseSpec:
    """Probability weights for one exogenous variable, in support order."""

    variable: str
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))


@dataclass(frozen=True)
class Mechanism:
    """A total deterministic map from parent value tuples to a target code."""

    target: str
    parents: tuple[str, ...]
    table: Mapping[tuple[int, ...], int]


def tabulate(
    target: str, parents: Sequence[FiniteVariable], fn: Callable[..., int]
) -> Mechanism:
    """Build a total mechanism table by evaluating ``fn`` on every parent combo."""
    table = {}
    for combo in itertools.product(*(p.support for p in parents)):
        table[combo] = int(fn(*combo))
    return Mechanism(target=target, parents=tuple(p.name for p in parents), table=table)


@dataclass(frozen=True)
class Intervention:
    """An assignment of fixed codes to endogenous variables.

    The empty intervention is allowed and denotes the factual world.
    """

    assignments: Mapping[str, int] = field(default_factory=dict)

    def label(self) -> str:
        if not self.assignments:
            return "(none)"
        return ",".join(f"{n}={v}" for n, v in self.assignments.items())


@dataclass(frozen=True)
class StructuralModel:
    """A complete finite-world model plus its role map.

    ``variables`` fixes the declared order used for table columns and for
    the enumeration of exogenous configurations, so two models with the
    same content and the same declaration order produce identical tables.
    """

    variables: tuple[FiniteVariable, ...]
    noise: Mapping[str, NoiseSpec]
    mechanisms: Mapping[str, Mechanism]
    roles: Mapping[str, str]
    truncation: bool = False

    def variable(self, name: str) -> FiniteVariable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    def has_variable(self, name: str) -> bool:
        return any(v.name == name for v in self.variables)

    def exogenous(self) -> tuple[FiniteVariable, ...]:
        return tuple(v for v in self.variables if v.kind == "exogenous")

    def endogenous(self) -> tuple[FiniteVariable, ...]:
        return tuple(v for v in self.variables if v.kind == "endogenous")

    def role_variable(self, role: str) -> str:
        """Name of the variable playing ``role``; raises RoleError if unmapped."""
        try:
            return self.roles[role]
        except KeyError:
            raise RoleError(f"model has no variable in role {role!r}") from None

    def role_or_none(self, role: str) -> str | None:
        return self.roles.get(role)

    def evaluation_order(self) -> tuple[str, ...]:
        """Endogenous variable names in an order compatible with the parent graph."""
        ts = graphlib.TopologicalSorter()
        for v in self.variables:
            if v.kind != "endogenous":
                continue
            mech = self.mechanisms.get(v.name)
            parents = mech.parents if mech is not None else ()
            ts.add(v.name, *[p for p in parents if self.has_variable(p)
                             and self.variable(p).kind == "endogenous"])
        return tuple(ts.static_order())

    def noise_space_size(self) -> int:
        return math.prod(len(v.support) for v in self.exogenous())


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[str, ...]
    warnings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


def validate_model(model: StructuralModel) -> ValidationReport:
    """Check a model for structural defects.

    A model is usable by the rest of the package if and only if the report
    carries no errors.  Warnings never block an operation.
    """
    errors: list[str] = []
    warnings: list[str] = []

    names = [v.name for v in model.variables]
    seen = set()
    for n in names:
        if not n:
            errors.append("variable with an empty name")
        if n in seen:
            errors.append(f"duplicate variable name {n!r}")
        seen.add(n)

    for v in model.variables:
        if v.kind not in ("exogenous", "endogenous"):
            errors.append(f"{v.name}: unknown kind {v.kind!r}")
        if len(v.support) == 0:
            errors.append(f"{v.name}: empty support")
        if len(set(v.support)) != len(v.support):
            errors.append(f"{v.name}: support codes are not distinct")
        if any(abs(c) > 2**31 - 1 for c in v.support):
            errors.append(f"{v.name}: support code out of range")

    # Noise: exactly the exogenous variables, each normalized.
    for v in model.exogenous():
        spec = model.noise.get(v.name)
        if spec is None:
            errors.append(f"{v.name}: exogenous variable without noise weights")
            continue
        if len(spec.weights) != len(v.support):
            errors.append(
                f"{v.name}: {len(spec.weights)} weights for "
                f"{len(v.support)} support codes"
            )
            continue
        if any(w < 0 for w in spec.weights):
            errors.append(f"{v.name}: negative weight")
        elif abs(sum(spec.weights) - 1.0) > WEIGHT_TOL:
            errors.append(f"{v.name}: weights sum to {sum(spec.weights)!r}, not 1")
    for n in model.noise:
        if not model.has_variable(n):
            errors.append(f"noise weights for unknown variable {n!r}")
        elif model.variable(n).kind != "exogenous":
            errors.append(f"noise weights for endogenous variable {n!r}")

    # Mechanisms: exactly the endogenous variables, each total.
    for v in model.endogenous():
        mech = model.mechanisms.get(v.name)
        if mech is None:
            errors.append(f"{v.name}: endogenous variable without a mechanism")
            continue
        if mech.target != v.name:
            errors.append(f"mechanism stored under {v.name!r} targets {mech.target!r}")
        bad_parent = False
        for p in mech.parents:
            if not model.has_variable(p):
                errors.append(f"{v.name}: unknown parent {p!r}")
                bad_parent = True
        if len(set(mech.parents)) != len(mech.parents):
            errors.append(f"{v.name}: duplicate parent")
            bad_parent = True
        if bad_parent:
            continue
        expected = itertools.product(*(model.variable(p).support for p in mech.parents))
        missing = 0
        for combo in expected:
            if combo not in mech.table:
                missing += 1
        if missing:
            errors.append(f"{v.name}: partial table, {missing} parent combinations missing")
        n_expected = math.prod(len(model.variable(p).support) for p in mech.parents)
        if len(mech.table) > n_expected:
            errors.append(f"{v.name}: table has rows outside the parent supports")
        support = set(v.support)
        for combo, out in mech.table.items():
            if out not in support:
                errors.append(
                    f"{v.name}: table output {out!r} at {combo!r} outside support"
                )
                break
    for n in model.mechanisms:
        if not model.has_variable(n):
            errors.append(f"mechanism for unknown variable {n!r}")
        elif model.variable(n).kind != "endogenous":
            errors.append(f"mechanism for exogenous variable {n!r}")

    # Roles.
    for role in REQUIRED_ROLES:
        if role not in model.roles:
            errors.append(f"missing role {role!r}")
    for role, var in model.roles.items():
        if role not in ROLE_NAMES:
            errors.append(f"unknown role {role!r}")
            continue
        if not model.has_variable(var):
            errors.append(f"role {role!r} names unknown variable {var!r}")
            continue
        if role in _BINARY_ROLES and tuple(model.variable(var).support) != (0, 1):
            errors.append(f"role {role!r} variable {var!r} must have support (0, 1)")
        if role != "U" and model.variable(var).kind != "endogenous":
            errors.append(f"role {role!r} variable {var!r} must be endogenous")
    if "A_D" in model.roles and "A_Y" in model.roles:
        if model.roles["A_D"] == model.roles["A_Y"]:
            warnings.append(
                "roles A_D and A_Y name the same variable; "
                "component interventions cannot be set apart"
            )
    if ("A_D" in model.roles) != ("A_Y" in model.roles):
        warnings.append("only one of roles A_D, A_Y is mapped")

    if not isinstance(model.truncation, bool):
        errors.append("truncation flag must be a bool")

    # Acyclicity, only meaningful once parents resolve.
    if not errors:
        try:
            model.evaluation_order()
        except graphlib.CycleError as exc:
            errors.append(f"cyclic mechanism graph: {exc.args[1]}")

    return ValidationReport(errors=tuple(errors), warnings=tuple(warnings))
