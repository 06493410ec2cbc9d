"""True causal quantities computed by counterfactual enumeration.

These are the ground-truth targets: the event-free contrast under component
interventions, the contrast among units event-free under either arm, and the
plain average effect.  Identification functionals (see
:mod:`indmech.identify`) are only ever checked against the values computed
here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    EmptyStratumError,
    PositivityError,
    RoleError,
    TruncatedOutcomeError,
)
from .model import Intervention, StructuralModel
from .worlds import conditional_mean, counterfactual_joint, event_probability, observed_law

# Markers used in place of a number when a quantity does not exist.
UNDEFINED_TRUNCATION = "undefined-due-to-truncation"
NOT_COMPUTED = "not-computed"

# The doubly event-free contrast compares outcomes across two worlds on the
# same configuration, so it is a cross-world quantity: computable here by
# construction, and checkable against data only through the audited
# assumptions.
SACE_NOTE = "cross-world quantity, defined on the shared configuration space"


def true_cse(model: StructuralModel, a_prime: int) -> float:
    """Outcome-component contrast among units event-free under ``a_prime``.

    Sets the event component of treatment to ``a_prime`` throughout and
    contrasts the outcome component at 1 versus 0, among the units whose
    event would not occur with the event component at ``a_prime``.
    """
    a_d = model.role_or_none("A_D")
    a_y = model.role_or_none("A_Y")
    if a_d is None or a_y is None or a_d == a_y:
        raise RoleError(
            "the component contrast needs roles A_D and A_Y on two distinct variables"
        )
    wt = counterfactual_joint(
        model,
        [
            Intervention({a_d: a_prime, a_y: 1}),
            Intervention({a_d: a_prime, a_y: 0}),
            Intervention({a_d: a_prime}),
        ],
    )
    d = model.role_variable("D")
    y = model.role_variable("Y")
    stratum = {(d, 2): 0}
    if event_probability(wt, stratum) <= 0.0:
        raise PositivityError(f"{{D=0 under the event component at {a_prime}}}")
    return conditional_mean(wt, (y, 0), stratum) - conditional_mean(wt, (y, 1), stratum)


def true_sace(model: StructuralModel) -> float:
    """Treatment effect among units event-free under both arms."""
    a = model.role_variable("A")
    d = model.role_variable("D")
    y = model.role_variable("Y")
    wt = counterfactual_joint(
        model, [Intervention({a: 1}), Intervention({a: 0})]
    )
    stratum = {(d, 0): 0, (d, 1): 0}
    if event_probability(wt, stratum) <= 0.0:
        raise EmptyStratumError(
            "principal stratum {event-free under both arms} has probability zero"
        )
    return conditional_mean(wt, (y, 0), stratum) - conditional_mean(wt, (y, 1), stratum)


def true_ate(model: StructuralModel) -> float:
    """Average treatment effect on the outcome; refuses truncated models."""
    if model.truncation:
        raise TruncatedOutcomeError(
            f"{UNDEFINED_TRUNCATION}: the outcome does not exist for units "
            "with the event, so no unconditional average is defined"
        )
    a = model.role_variable("A")
    y = model.role_variable("Y")
    wt = counterfactual_joint(
        model, [Intervention({a: 1}), Intervention({a: 0})]
    )
    return conditional_mean(wt, (y, 0)) - conditional_mean(wt, (y, 1))


def naive_contrast(law, d: int) -> float:
    """Observed arm contrast within the D=d stratum, no causal content implied."""
    return conditional_mean(law, "Y", {"A": 1, "D": d}) - conditional_mean(
        law, "Y", {"A": 0, "D": d}
    )


@dataclass(frozen=True)
class EstimandReport:
    """All ground-truth quantities of one model, plus observed arm moments.

    Fields hold floats where the quantity exists and a short string marker
    where it does not ("undefined-due-to-truncation", "not-computed").
    """

    cse0: float | str
    cse1: float | str
    sace: float | str
    ate: float | str
    naive_d0: float | str
    naive_d1: float | str
    naive_marginal: float | str
    survival_a1: float | str
    survival_a0: float | str
    mean_y_a1: float | str
    mean_y_a0: float | str
    # Labels of every intervention enumerated to produce the report.
    provenance: tuple[str, ...] = ()
    sace_note: str = SACE_NOTE

    def as_dict(self) -> dict[str, float | str]:
        return {
            "cse0": self.cse0,
            "cse1": self.cse1,
            "sace": self.sace,
            "ate": self.ate,
            "naive_d0": self.naive_d0,
            "naive_d1": self.naive_d1,
            "naive_marginal": self.naive_marginal,
            "survival_a1": self.survival_a1,
            "survival_a0": self.survival_a0,
            "mean_y_a1": self.mean_y_a1,
            "mean_y_a0": self.mean_y_a0,
        }


def _report_provenance(model: StructuralModel) -> tuple[str, ...]:
    labels: list[str] = []

    def add(iv: Intervention) -> None:
        text = iv.label()
        if text not in labels:
            labels.append(text)

    a_d = model.role_or_none("A_D")
    a_y = model.role_or_none("A_Y")
    if a_d is not None and a_y is not None and a_d != a_y:
        for a_prime in (0, 1):
            add(Intervention({a_d: a_prime, a_y: 1}))
            add(Intervention({a_d: a_prime, a_y: 0}))
            add(Intervention({a_d: a_prime}))
    a = model.role_or_none("A")
    if a is not None:
        add(Intervention({a: 1}))
        add(Intervention({a: 0}))
    add(Intervention({}))
    return tuple(labels)


def estimand_report(model: StructuralModel) -> EstimandReport:
    """Compute every estimand, downgrading impossibilities to markers."""
    law = observed_law(model)

    def guard(fn, *args):
        try:
            return fn(*args)
        except TruncatedOutcomeError:
            return UNDEFINED_TRUNCATION
        except (RoleError, PositivityError, EmptyStratumError):
            return NOT_COMPUTED

    def arm_survival(a: int) -> float | str:
        pa = event_probability(law, {"A": a})
        if pa <= 0.0:
            return NOT_COMPUTED
        return event_probability(law, {"A": a, "D": 0}) / pa

    def arm_mean(a: int) -> float | str:
        return guard(conditional_mean, law, "Y", {"A": a})

    mean_y_a1 = arm_mean(1)
    mean_y_a0 = arm_mean(0)
    if isinstance(mean_y_a1, float) and isinstance(mean_y_a0, float):
        marginal: float | str = mean_y_a1 - mean_y_a0
    else:
        marginal = (
            UNDEFINED_TRUNCATION
            if UNDEFINED_TRUNCATION in (mean_y_a1, mean_y_a0)
            else NOT_COMPUTED
        )

    return EstimandReport(
        cse0=guard(true_cse, model, 0),
        cse1=guard(true_cse, model, 1),
        sace=guard(true_sace, model),
        ate=guard(true_ate, model),
        naive_d0=guard(naive_contrast, law, 0),
        naive_d1=guard(naive_contrast, law, 1),
        naive_marginal=marginal,
        survival_a1=arm_survival(1),
        survival_a0=arm_survival(0),
        mean_y_a1=mean_y_a1,
        mean_y_a0=mean_y_a0,
        provenance=_report_provenance(model),
    )
