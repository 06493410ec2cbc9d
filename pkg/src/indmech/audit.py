"""Numerical audits of the assumptions behind the causal readings.

Every audit checks one assumption on the model's exact counterfactual law
and returns pass, fail, or inconclusive.  Failing checks carry a witness,
a concrete configuration or stratum where the assumption breaks, so a
violation is never reported as a bare boolean.  Inconclusive means a
conditioning stratum the check needs has probability zero; that is reported
as such and never counted as a pass.

The structural check works on the mechanism tables themselves: a parent is
effective only if changing it can change the output, so declared-but-inert
parents do not count, and two mechanisms sharing a noise variable are
detected no matter how the tables are written.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RoleError
from .model import Intervention, Mechanism, StructuralModel
from .worlds import (
    Table,
    UNDEFINED,
    WorldTable,
    _aggregate,
    counterfactual_joint,
    event_probability,
    observed_law,
)

DEFAULT_TOLERANCE = 1e-9
POSITIVITY_WARN = 1e-6

# Audit names whose joint pass certifies the event-free contrast reading
# and, with the extra two, the doubly-event-free reading.
CSE_GATE = (
    "structure",
    "positivity",
    "determinism",
    "decomposition",
    "multiplicative_survival",
    "posterior_invariance",
)
SACE_GATE = CSE_GATE + ("monotonicity", "crossworld")
# The standardized contrast does not rest on the frailty-level survival
# factorization, only on the structure, positivity within covariate levels,
# event determinism, and the component decomposition.
STANDARDIZED_GATE = ("structure", "positivity", "determinism", "decomposition")


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # "pass", "fail", or "inconclusive"
    residual: float = 0.0
    witness: dict | None = None
    detail: str = ""
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class AuditReport:
    checks: tuple[CheckResult, ...]
    tolerance: float

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def ok(self) -> bool:
        return all(c.status == "pass" for c in self.checks)

    def failed(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if c.status == "fail")

    def not_passed(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if c.status != "pass")

    def all_pass(self, names) -> bool:
        return all(self.check(n).status == "pass" for n in names)


def _row_witness(table: Table, mask: np.ndarray) -> dict | None:
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return None
    row = table.codes[idx[0]]
    return {
        col: (None if c == UNDEFINED else int(c))
        for col, c in zip(table.columns, row)
    }


def _effective_parents(model: StructuralModel, mech: Mechanism) -> set[str]:
    """Declared parents that can actually move the output."""
    effective = set()
    for i, p in enumerate(mech.parents):
        seen: dict[tuple, int] = {}
        for combo, out in mech.table.items():
            rest = combo[:i] + combo[i + 1:]
            if rest in seen:
                if seen[rest] != out:
                    effective.add(p)
                    break
            else:
                seen[rest] = out
    return effective


def audit_structure(model: StructuralModel) -> CheckResult:
    """Check the wiring against the reference graph, role by role.

    Verifies that every mechanism's effective parents stay inside the edge
    set the causal reading assumes, that no noise variable feeds two
    mechanisms, and that the shared cause U feeds only the event and the
    outcome.
    """
    name = "structure"
    u_var = model.role_or_none("U")
    da_var = model.role_or_none("D_A")
    if u_var is None or da_var is None:
        return CheckResult(
            name, "inconclusive",
            detail="needs roles U and D_A to compare against the reference graph",
        )
    if model.variable(u_var).kind != "exogenous":
        return CheckResult(
            name, "inconclusive",
            detail=f"role U variable {u_var!r} is not exogenous",
        )
    role_of = {v: r for r, v in model.roles.items()}
    unplaced = [
        v.name for v in model.endogenous() if v.name not in role_of
    ]
    if unplaced:
        return CheckResult(
            name, "inconclusive",
            detail="endogenous variables outside the role map: "
            + ", ".join(sorted(unplaced)),
        )

    a_var = model.role_variable("A")
    d_var = model.role_variable("D")
    y_var = model.role_variable("Y")
    ad_var = model.role_or_none("A_D")
    ay_var = model.role_or_none("A_Y")
    l_var = model.role_or_none("L")
    m_var = model.role_or_none("M")
    a_ref = ad_var or a_var
    y_ref = ay_var or a_var

    allowed: dict[str, set[str]] = {a_var: set()}
    if ad_var:
        allowed[ad_var] = {a_var}
    if ay_var:
        allowed[ay_var] = {a_var}
    if l_var:
        allowed[l_var] = {a_ref}
    allowed[da_var] = {a_ref} | ({l_var} if l_var else set())
    allowed[d_var] = {da_var, u_var} | ({l_var} if l_var else set())
    allowed[y_var] = {y_ref, d_var, u_var} | ({l_var} if l_var else set())
    if m_var:
        allowed[m_var] = {a_var, d_var}

    violations = []
    readers: dict[str, list[str]] = {}
    for v in model.endogenous():
        mech = model.mechanisms[v.name]
        effective = _effective_parents(model, mech)
        for p in effective:
            if model.variable(p).kind == "exogenous":
                if p != u_var:
                    readers.setdefault(p, []).append(v.name)
                    continue
            if p not in allowed[v.name]:
                violations.append((v.name, p))
    for noise_var, who in sorted(readers.items()):
        if len(who) > 1:
            for target in who:
                violations.append((target, noise_var))
    u_readers = [
        v.name
        for v in model.endogenous()
        if u_var in _effective_parents(model, model.mechanisms[v.name])
    ]
    # U edges into D and Y are the assumed ones; anything else is a leak.
    bad_u = [t for t in u_readers if t not in (d_var, y_var)]
    for t in bad_u:
        if (t, u_var) not in violations:
            violations.append((t, u_var))

    if violations:
        first = violations[0]
        detail = "; ".join(f"{p} -> {t} is outside the reference graph"
                           for t, p in violations)
        return CheckResult(
            name, "fail",
            residual=float(len(violations)),
            witness={"mechanism": first[0], "parent": first[1]},
            detail=detail,
        )
    return CheckResult(name, "pass", detail="effective edges match the reference graph")


def audit_positivity(
    model: StructuralModel, warn_threshold: float = POSITIVITY_WARN
) -> CheckResult:
    """Every stratum the functionals condition on must have positive mass.

    With a covariate role this includes the within-level strata: any
    covariate level reachable among event-free units must be reachable in
    both arms.  Positive strata below ``warn_threshold`` are flagged.
    """
    name = "positivity"
    law = observed_law(model)
    required: list[tuple[str, dict]] = []
    for a in (0, 1):
        required.append((f"{{A={a}}}", {"A": a}))
        required.append((f"{{A={a}, D=0}}", {"A": a, "D": 0}))
    if "L" in law.columns:
        for l_val in model.variable(model.role_variable("L")).support:
            if event_probability(law, {"D": 0, "L": l_val}) <= 0.0:
                continue
            for a in (0, 1):
                required.append(
                    (f"{{A={a}, D=0, L={l_val}}}", {"A": a, "D": 0, "L": l_val})
                )
    warnings = []
    empty = []
    smallest = (None, 1.0)
    for label, event in required:
        p = event_probability(law, event)
        if p <= 0.0:
            empty.append(label)
        elif p < warn_threshold:
            warnings.append(f"stratum {label} has probability {p:.3g}")
        if p < smallest[1]:
            smallest = (label, p)
    if empty:
        return CheckResult(
            name, "fail",
            residual=float(len(empty)),
            witness={"stratum": empty[0]},
            detail="empty strata: " + ", ".join(empty),
            warnings=tuple(warnings),
        )
    return CheckResult(
        name, "pass",
        detail=f"smallest required stratum {smallest[0]} has probability {smallest[1]:.6g}",
        warnings=tuple(warnings),
    )


def audit_determinism(model: StructuralModel) -> CheckResult:
    """The precursor forces the event: D_A = 1 must imply D = 1 in every world."""
    name = "determinism"
    da_var = model.role_or_none("D_A")
    if da_var is None:
        return CheckResult(name, "inconclusive", detail="no role D_A to check against")
    a_var = model.role_variable("A")
    d_var = model.role_variable("D")
    wt = counterfactual_joint(
        model, [Intervention({a_var: 0}), Intervention({a_var: 1})]
    )
    worst = 0.0
    witness = None
    for k in (0, 1):
        da = wt.codes[:, wt.column_index((da_var, k))]
        d = wt.codes[:, wt.column_index((d_var, k))]
        mask = (da == 1) & (d == 0)
        mass = float(wt.probs[mask].sum())
        if mass > worst:
            worst = mass
            witness = _row_witness(wt, mask)
    if worst > 0.0:
        return CheckResult(
            name, "fail", residual=worst, witness=witness,
            detail="configurations with the precursor but not the event "
            f"carry probability {worst:.6g}",
        )
    return CheckResult(name, "pass")


def audit_decomposition(model: StructuralModel) -> CheckResult:
    """Recorded treatment components must copy A and jointly reproduce it.

    Two parts: the observed law must put probability one on A = A_D = A_Y,
    and setting both components to a value must reproduce, configuration by
    configuration, the world where A itself is set to that value.
    """
    name = "decomposition"
    ad_var = model.role_or_none("A_D")
    ay_var = model.role_or_none("A_Y")
    if ad_var is None or ay_var is None or ad_var == ay_var:
        return CheckResult(
            name, "inconclusive",
            detail="needs distinct variables in roles A_D and A_Y",
        )
    a_var = model.role_variable("A")
    d_var = model.role_variable("D")
    y_var = model.role_variable("Y")
    da_var = model.role_or_none("D_A")

    factual = counterfactual_joint(model, ())
    a = factual.codes[:, factual.column_index(a_var)]
    ad = factual.codes[:, factual.column_index(ad_var)]
    ay = factual.codes[:, factual.column_index(ay_var)]
    mask = (a != ad) | (a != ay)
    mass = float(factual.probs[mask].sum())
    if mass > 0.0:
        return CheckResult(
            name, "fail", residual=mass, witness=_row_witness(factual, mask),
            detail=f"observed components disagree with A on probability {mass:.6g}",
        )

    wt = counterfactual_joint(
        model,
        [
            Intervention({a_var: 0}),
            Intervention({a_var: 1}),
            Intervention({ad_var: 0, ay_var: 0}),
            Intervention({ad_var: 1, ay_var: 1}),
        ],
    )
    compare = [v for v in (da_var, d_var, y_var) if v is not None]
    worst = 0.0
    witness = None
    for a_val in (0, 1):
        mask = np.zeros(len(wt), dtype=bool)
        for v in compare:
            left = wt.codes[:, wt.column_index((v, a_val))]
            right = wt.codes[:, wt.column_index((v, 2 + a_val))]
            mask |= left != right
        mass = float(wt.probs[mask].sum())
        if mass > worst:
            worst = mass
            witness = _row_witness(wt, mask)
    if worst > 0.0:
        return CheckResult(
            name, "fail", residual=worst, witness=witness,
            detail="joint component intervention differs from the whole-treatment "
            f"world on probability {worst:.6g}",
        )
    return CheckResult(name, "pass")


def audit_multiplicative_survival(
    model: StructuralModel, tol: float = DEFAULT_TOLERANCE
) -> CheckResult:
    """Within frailty levels, survival must factor into arm and frailty parts.

    Compares P(event-free under a' | U=u) against
    P(event-free | U=u, precursor-free) * P(precursor-free | A=a') for every
    frailty level and arm.
    """
    name = "multiplicative_survival"
    u_var = model.role_or_none("U")
    da_var = model.role_or_none("D_A")
    if u_var is None or da_var is None:
        return CheckResult(name, "inconclusive", detail="needs roles U and D_A")
    a_var = model.role_variable("A")
    d_var = model.role_variable("D")
    obs = counterfactual_joint(model, ())
    two = counterfactual_joint(
        model, [Intervention({a_var: 0}), Intervention({a_var: 1})]
    )
    worst = 0.0
    witness = None
    detail = ""
    unverifiable = []
    for a_val in (0, 1):
        p_arm = event_probability(obs, {a_var: a_val})
        if p_arm <= 0.0:
            unverifiable.append(f"{{A={a_val}}}")
            continue
        p_da0 = event_probability(obs, {da_var: 0, a_var: a_val}) / p_arm
        for u in model.variable(u_var).support:
            p_u = event_probability(obs, {u_var: u})
            if p_u <= 0.0:
                continue
            lhs = event_probability(two, {(d_var, a_val): 0, u_var: u}) / p_u
            p_cond = event_probability(obs, {u_var: u, da_var: 0})
            if p_cond <= 0.0:
                unverifiable.append(f"{{U={u}, D_A=0}}")
                continue
            surv = event_probability(obs, {d_var: 0, da_var: 0, u_var: u}) / p_cond
            resid = abs(lhs - surv * p_da0)
            if resid > worst:
                worst = resid
                witness = {"U": int(u), "a_prime": a_val}
                detail = (
                    f"P(D=0 under a'={a_val} | U={u}) = {lhs:.6g} but the "
                    f"factorization gives {surv * p_da0:.6g}"
                )
    if worst > tol:
        return CheckResult(name, "fail", residual=worst, witness=witness, detail=detail)
    if unverifiable:
        return CheckResult(
            name, "inconclusive", residual=worst,
            detail="zero-probability strata: " + ", ".join(sorted(set(unverifiable))),
        )
    return CheckResult(name, "pass", residual=worst)


def audit_posterior_invariance(
    model: StructuralModel, tol: float = DEFAULT_TOLERANCE
) -> CheckResult:
    """The frailty composition of the event-free must not depend on the arm."""
    name = "posterior_invariance"
    u_var = model.role_or_none("U")
    if u_var is None:
        return CheckResult(name, "inconclusive", detail="needs role U")
    a_var = model.role_variable("A")
    d_var = model.role_variable("D")
    two = counterfactual_joint(
        model, [Intervention({a_var: 0}), Intervention({a_var: 1})]
    )
    p_free = [event_probability(two, {(d_var, k): 0}) for k in (0, 1)]
    if min(p_free) <= 0.0:
        k = p_free.index(min(p_free))
        return CheckResult(
            name, "inconclusive",
            detail=f"no event-free units under a'={k}; posterior undefined",
        )
    worst = 0.0
    witness = None
    for u in model.variable(u_var).support:
        post = [
            event_probability(two, {u_var: u, (d_var, k): 0}) / p_free[k]
            for k in (0, 1)
        ]
        resid = abs(post[0] - post[1])
        if resid > worst:
            worst = resid
            witness = {"U": int(u)}
    if worst > tol:
        return CheckResult(
            name, "fail", residual=worst, witness=witness,
            detail="event-free frailty posterior differs between arms by "
            f"{worst:.6g} at U={witness['U']}",
        )
    return CheckResult(name, "pass", residual=worst)


def audit_monotonicity(model: StructuralModel) -> CheckResult:
    """Treatment must never prevent the precursor it can cause.

    Checks pointwise D_A(a=1) >= D_A(a=0) and, alongside it, that being
    event-free under a=1 coincides with being event-free under both arms.
    """
    name = "monotonicity"
    da_var = model.role_or_none("D_A")
    if da_var is None:
        return CheckResult(name, "inconclusive", detail="no role D_A to check against")
    a_var = model.role_variable("A")
    d_var = model.role_variable("D")
    wt = counterfactual_joint(
        model, [Intervention({a_var: 1}), Intervention({a_var: 0})]
    )
    da_treated = wt.codes[:, wt.column_index((da_var, 0))]
    da_control = wt.codes[:, wt.column_index((da_var, 1))]
    mono_mask = (da_treated == 0) & (da_control == 1)
    mono_mass = float(wt.probs[mono_mask].sum())

    d_treated = wt.codes[:, wt.column_index((d_var, 0))]
    d_control = wt.codes[:, wt.column_index((d_var, 1))]
    equiv_mask = (d_treated == 0) & (d_control == 1)
    equiv_mass = float(wt.probs[equiv_mask].sum())
    broken = (
        f"event-free under a=1 fails to imply event-free under a=0 on "
        f"probability {equiv_mass:.6g}"
    )
    if mono_mass > 0.0:
        return CheckResult(
            name, "fail", residual=mono_mass,
            witness=_row_witness(wt, mono_mask),
            detail=f"precursor prevented by treatment on probability {mono_mass:.6g}; "
            + broken,
        )
    if equiv_mass > 0.0:
        return CheckResult(
            name, "fail", residual=equiv_mass,
            witness=_row_witness(wt, equiv_mask),
            detail=broken,
        )
    return CheckResult(
        name, "pass",
        detail="event-free under a=1 implies event-free under a=0 everywhere",
    )


def audit_crossworld(
    model: StructuralModel, tol: float = DEFAULT_TOLERANCE
) -> CheckResult:
    """Control-world outcome and treated-world event must be independent
    within frailty levels of the control-world event-free."""
    name = "crossworld"
    u_var = model.role_or_none("U")
    if u_var is None:
        return CheckResult(name, "inconclusive", detail="needs role U")
    a_var = model.role_variable("A")
    d_var = model.role_variable("D")
    y_var = model.role_variable("Y")
    wt = counterfactual_joint(
        model, [Intervention({a_var: 0}), Intervention({a_var: 1})]
    )
    u_col = wt.codes[:, wt.column_index(u_var)]
    d0 = wt.codes[:, wt.column_index((d_var, 0))]
    d1 = wt.codes[:, wt.column_index((d_var, 1))]
    y0 = wt.codes[:, wt.column_index((y_var, 0))]
    worst = 0.0
    witness = None
    unverifiable = []
    for u in model.variable(u_var).support:
        cond = (u_col == u) & (d0 == 0)
        pc = float(wt.probs[cond].sum())
        if pc <= 0.0:
            unverifiable.append(f"{{U={u}, D=0 under a=0}}")
            continue
        p = wt.probs[cond] / pc
        y_vals = y0[cond]
        d_vals = d1[cond]
        for y in model.variable(y_var).support:
            py = float(p[y_vals == y].sum())
            for d in (0, 1):
                pd = float(p[d_vals == d].sum())
                pyd = float(p[(y_vals == y) & (d_vals == d)].sum())
                resid = abs(pyd - py * pd)
                if resid > worst:
                    worst = resid
                    witness = {"U": int(u), "Y": int(y), "D": int(d)}
    if worst > tol:
        return CheckResult(
            name, "fail", residual=worst, witness=witness,
            detail="control-world outcome and treated-world event are "
            f"dependent given the frailty level, residual {worst:.6g}",
        )
    if unverifiable:
        return CheckResult(
            name, "inconclusive", residual=worst,
            detail="zero-probability strata: " + ", ".join(unverifiable),
        )
    return CheckResult(name, "pass", residual=worst)


def run_all_audits(
    model: StructuralModel,
    tol: float = DEFAULT_TOLERANCE,
    warn_threshold: float = POSITIVITY_WARN,
) -> AuditReport:
    checks = (
        audit_structure(model),
        audit_positivity(model, warn_threshold),
        audit_determinism(model),
        audit_decomposition(model),
        audit_multiplicative_survival(model, tol),
        audit_posterior_invariance(model, tol),
        audit_monotonicity(model),
        audit_crossworld(model, tol),
    )
    return AuditReport(checks=checks, tolerance=tol)


@dataclass(frozen=True)
class ResponseTypeTable:
    """Joint law of the event and product-use patterns across both arms.

    Proportions classify units by actual product use (uses the assigned
    product when event-free under assignment): compliers use it exactly
    when assigned, never-takers and always-takers use one product
    regardless, defiers use the opposite one.
    """

    table: Table
    proportions: dict[str, float]


def classify_response_types(model: StructuralModel) -> ResponseTypeTable:
    """Derive product-use response types from the two-arm counterfactuals.

    Use under assignment to treatment is the absence of the event there;
    use under control is the presence of the event there.  The proportions
    sum to one, and under precursor monotonicity the always-taker cell is
    structurally empty.
    """
    a_var = model.role_variable("A")
    d_var = model.role_variable("D")
    da_var = model.role_or_none("D_A")
    wt = counterfactual_joint(
        model, [Intervention({a_var: 1}), Intervention({a_var: 0})]
    )
    d_treated = wt.codes[:, wt.column_index((d_var, 0))]
    d_control = wt.codes[:, wt.column_index((d_var, 1))]
    m_treated = 1 - d_treated
    m_control = d_control

    cols = []
    names = []
    if da_var is not None:
        names += ["D_A(a=1)", "D_A(a=0)"]
        cols += [
            wt.codes[:, wt.column_index((da_var, 0))],
            wt.codes[:, wt.column_index((da_var, 1))],
        ]
    names += ["D(a=1)", "D(a=0)", "M(a=1)", "M(a=0)"]
    cols += [d_treated, d_control, m_treated, m_control]
    uniq, agg = _aggregate(np.column_stack(cols), wt.probs)
    table = Table(columns=tuple(names), codes=uniq, probs=agg)

    def mass(m1: int, m0: int) -> float:
        return float(wt.probs[(m_treated == m1) & (m_control == m0)].sum())

    proportions = {
        "complier": mass(1, 0),
        "never-taker": mass(0, 0),
        "defier": mass(0, 1),
        "always-taker": mass(1, 1),
    }
    return ResponseTypeTable(table=table, proportions=proportions)
