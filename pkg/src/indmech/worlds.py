"""Exact enumeration of counterfactual worlds.

Every query in the package reduces to one operation: enumerate the exogenous
configuration space once, evaluate the endogenous variables under each
requested intervention on that shared configuration, and aggregate the
configuration probabilities by value tuple.  Because all interventions are
evaluated on the same configurations, cross-world events such as
``{D under a=0} = 0 and {D under a=1} = 0`` are well defined and computed
exactly, up to float accumulation.

When a model carries the truncation flag, the outcome cell of a world is
replaced by a distinguished "undefined" mark wherever that world's event
indicator is 1.  Conditional means refuse to average over undefined cells.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

from .errors import (
    ColumnError,
    InvalidModelError,
    NoiseSpaceError,
    PositivityError,
    TruncatedOutcomeError,
)
from .model import Intervention, StructuralModel, validate_model

# Internal integer mark for an undefined outcome cell.  Rows expose it as None.
UNDEFINED = np.iinfo(np.int64).min

ENUMERATION_CAP = 1 << 24

ColumnRef = Union[str, tuple]
Event = Union[Mapping, Callable[[Mapping[str, object]], bool]]


@dataclass(frozen=True)
class Table:
    """A finite probability table: integer value rows with a weight each.

    ``codes`` holds one row per distinct value tuple (UNDEFINED marks an
    undefined outcome cell), ``probs`` the aggregated probabilities.  Rows
    are stored in lexicographic order, so equal distributions produce
    identical arrays.
    """

    columns: tuple[str, ...]
    codes: np.ndarray
    probs: np.ndarray

    def __len__(self) -> int:
        return self.codes.shape[0]

    def column_index(self, ref: ColumnRef) -> int:
        name = _ref_to_name(ref)
        try:
            return self.columns.index(name)
        except ValueError:
            raise ColumnError(
                f"no column {name!r}; columns are {', '.join(self.columns)}"
            ) from None

    def rows(self) -> Iterator[tuple[tuple, float]]:
        for i in range(len(self)):
            vals = tuple(
                None if c == UNDEFINED else int(c) for c in self.codes[i]
            )
            yield vals, float(self.probs[i])

    def total(self) -> float:
        return float(self.probs.sum())

    def dump(self) -> str:
        return format_table(self)


@dataclass(frozen=True)
class WorldTable(Table):
    """Joint law of all exogenous variables and per-intervention copies."""

    interventions: tuple[Intervention, ...] = ()


@dataclass(frozen=True)
class ObservedLaw(Table):
    """The factual law projected onto the observed roles A[, L], D, Y."""


def _ref_to_name(ref: ColumnRef) -> str:
    if isinstance(ref, tuple):
        name, world = ref
        return f"{name}@{world}"
    return str(ref)


class _Compiled:
    """Arrays precomputed once per model for vectorized evaluation."""

    def __init__(self, model: StructuralModel):
        report = validate_model(model)
        if not report.ok:
            raise InvalidModelError(report)
        self.model = model
        self.exo = model.exogenous()
        self.endo_order = model.evaluation_order()
        self.declared_endo = tuple(v.name for v in model.endogenous())
        self.codes_of = {}
        self.pos_of = {}
        self.size_of = {}
        for v in model.variables:
            self.codes_of[v.name] = np.asarray(v.support, dtype=np.int64)
            self.pos_of[v.name] = {code: i for i, code in enumerate(v.support)}
            self.size_of[v.name] = len(v.support)
        self.weights = {
            v.name: np.asarray(model.noise[v.name].weights, dtype=np.float64)
            for v in self.exo
        }
        # Flat lookup per mechanism: mixed-radix parent positions -> output position.
        self.lookup = {}
        for name in self.endo_order:
            mech = model.mechanisms[name]
            sizes = [self.size_of[p] for p in mech.parents]
            flat = np.zeros(math.prod(sizes) if sizes else 1, dtype=np.int32)
            for combo, out in mech.table.items():
                idx = 0
                for p, c, s in zip(mech.parents, combo, sizes):
                    idx = idx * s + self.pos_of[p][c]
                flat[idx] = self.pos_of[name][out]
            self.lookup[name] = (mech.parents, sizes, flat)

    def eval_world(
        self, env: dict[str, np.ndarray], n: int, intervention: Intervention
    ) -> dict[str, np.ndarray]:
        """Evaluate all endogenous variables on shared exogenous positions."""
        out = dict(env)
        fixed = intervention.assignments
        for name in self.endo_order:
            if name in fixed:
                pos = self.pos_of[name][fixed[name]]
                out[name] = np.full(n, pos, dtype=np.int32)
                continue
            parents, sizes, flat = self.lookup[name]
            if not parents:
                out[name] = np.full(n, flat[0], dtype=np.int32)
                continue
            idx = np.zeros(n, dtype=np.int64)
            for p, s in zip(parents, sizes):
                idx *= s
                idx += out[p]
            out[name] = flat[idx]
        return out


def _check_interventions(
    model: StructuralModel, interventions: Sequence[Intervention]
) -> None:
    for iv in interventions:
        for name, code in iv.assignments.items():
            if not model.has_variable(name):
                raise ValueError(f"intervention target {name!r} is not a variable")
            var = model.variable(name)
            if var.kind != "endogenous":
                raise ValueError(
                    f"intervention target {name!r} is exogenous; only endogenous "
                    "variables can be set"
                )
            if code not in var.support:
                raise ValueError(
                    f"intervention value {code!r} outside the support of {name!r}"
                )


def _exo_grid(comp: _Compiled, cap: int):
    sizes = [comp.size_of[v.name] for v in comp.exo]
    total = math.prod(sizes) if sizes else 1
    if total > cap:
        raise NoiseSpaceError(total, cap)
    env: dict[str, np.ndarray] = {}
    probs = np.ones(total, dtype=np.float64)
    for i, v in enumerate(comp.exo):
        reps_after = math.prod(sizes[i + 1:]) if i + 1 < len(sizes) else 1
        reps_before = total // (sizes[i] * reps_after)
        arr = np.tile(
            np.repeat(np.arange(sizes[i], dtype=np.int32), reps_after), reps_before
        )
        env[v.name] = arr
        probs *= comp.weights[v.name][arr]
    keep = probs > 0.0
    if not keep.all():
        probs = probs[keep]
        env = {k: a[keep] for k, a in env.items()}
    return env, probs


def _aggregate(matrix: np.ndarray, probs: np.ndarray):
    uniq, inverse = np.unique(matrix, axis=0, return_inverse=True)
    agg = np.bincount(inverse.ravel(), weights=probs, minlength=uniq.shape[0])
    return uniq, agg


def counterfactual_joint(
    model: StructuralModel,
    interventions: Sequence[Intervention] = (),
    cap: int = ENUMERATION_CAP,
) -> WorldTable:
    """Exact joint law of counterfactual copies under each intervention.

    An empty sequence yields the no-intervention (factual) joint.  Columns
    are the exogenous variables followed by one copy of every endogenous
    variable per intervention; with more than one intervention the copies
    are suffixed ``@k`` by intervention index.
    """
    comp = _Compiled(model)
    worlds = tuple(
        iv if isinstance(iv, Intervention) else Intervention(dict(iv))
        for iv in interventions
    )
    if not worlds:
        worlds = (Intervention({}),)
    _check_interventions(model, worlds)
    env, probs = _exo_grid(comp, cap)
    n = probs.shape[0]

    tag = len(worlds) > 1
    columns: list[str] = [v.name for v in comp.exo]
    cols: list[np.ndarray] = [comp.codes_of[v.name][env[v.name]] for v in comp.exo]

    d_var = model.role_or_none("D")
    y_var = model.role_or_none("Y")
    for k, iv in enumerate(worlds):
        values = comp.eval_world(env, n, iv)
        world_codes = {}
        for name in comp.declared_endo:
            world_codes[name] = comp.codes_of[name][values[name]].astype(np.int64)
        if model.truncation and d_var is not None and y_var is not None:
            dead = world_codes[d_var] == 1
            yc = world_codes[y_var].copy()
            yc[dead] = UNDEFINED
            world_codes[y_var] = yc
        for name in comp.declared_endo:
            columns.append(f"{name}@{k}" if tag else name)
            cols.append(world_codes[name])

    matrix = np.column_stack(cols) if cols else np.zeros((n, 0), dtype=np.int64)
    uniq, agg = _aggregate(matrix, probs)
    return WorldTable(
        columns=tuple(columns), codes=uniq, probs=agg, interventions=worlds
    )


def observed_law(model: StructuralModel) -> ObservedLaw:
    """Project the factual joint onto the observed roles A[, L], D, Y.

    Exactly equal to marginalizing the no-intervention counterfactual joint;
    the outcome cell keeps its undefined mark where the event occurred.
    """
    wt = counterfactual_joint(model, ())
    role_order = [r for r in ("A", "L", "D", "Y") if model.role_or_none(r)]
    idx = [wt.column_index(model.roles[r]) for r in role_order]
    uniq, agg = _aggregate(wt.codes[:, idx], wt.probs)
    return ObservedLaw(columns=tuple(role_order), codes=uniq, probs=agg)


def _mask_for(table: Table, event: Mapping) -> np.ndarray:
    mask = np.ones(len(table), dtype=bool)
    for ref, val in event.items():
        j = table.column_index(ref)
        target = UNDEFINED if val is None else int(val)
        mask &= table.codes[:, j] == target
    return mask


def _describe(event) -> str:
    if event is None:
        return "(all rows)"
    if callable(event):
        return "(predicate)"
    parts = []
    for ref, val in event.items():
        shown = "undefined" if val is None else val
        parts.append(f"{_ref_to_name(ref)}={shown}")
    return "{" + ", ".join(parts) + "}"


def event_probability(table: Table, event: Event) -> float:
    """Probability of an event given as a column->value map or a predicate.

    Mapping values compare codes for equality; None matches the undefined
    outcome mark.  A predicate receives one dict per row, keyed by column
    name, with None standing for undefined cells.
    """
    if callable(event):
        total = 0.0
        for vals, p in table.rows():
            row = dict(zip(table.columns, vals))
            if event(row):
                total += p
        return total
    return float(table.probs[_mask_for(table, event)].sum())


def conditional_mean(
    table: Table, target: ColumnRef, given: Mapping | None = None
) -> float:
    """Exact conditional mean of a numeric column.

    Raises PositivityError when the conditioning event has zero probability
    and TruncatedOutcomeError when any selected cell of the target column is
    undefined, i.e. the conditioning set does not rule the event out.
    """
    j = table.column_index(target)
    if given:
        mask = _mask_for(table, given)
    else:
        mask = np.ones(len(table), dtype=bool)
    p = table.probs[mask]
    ptot = float(p.sum())
    if ptot <= 0.0:
        raise PositivityError(_describe(given))
    vals = table.codes[mask, j]
    if (vals == UNDEFINED).any():
        raise TruncatedOutcomeError(
            f"outcome {_ref_to_name(target)} is undefined on part of "
            f"{_describe(given)}; condition on the event being absent"
        )
    return float((vals * p).sum() / ptot)


def format_table(table: Table) -> str:
    """Tab-separated textual dump, one row per line, probability last."""
    lines = []
    if isinstance(table, WorldTable):
        for k, iv in enumerate(table.interventions):
            lines.append(f"# world {k}: {iv.label()}")
    lines.append("\t".join(table.columns + ("prob",)))
    for vals, p in table.rows():
        cells = ["undef" if v is None else str(v) for v in vals]
        cells.append(repr(p))
        lines.append("\t".join(cells))
    return "\n".join(lines)
