"""Identification functionals of the observed law and their plug-in estimators.

Both functionals are functions of the observed data law alone.  Whether
their values carry a causal reading is a separate question, answered by the
audits in :mod:`indmech.audit`; reporting code must consult those before
attaching any interpretation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ColumnError, EmptyStratumError, PositivityError
from .sampling import Dataset
from .worlds import ObservedLaw, conditional_mean, event_probability


@dataclass(frozen=True)
class FunctionalResult:
    """Value of an identification functional on one observed law.

    ``claims`` lists the causal quantities the functional identifies when
    the corresponding assumption sets hold; it is a statement about the
    formula, not about the model at hand.
    """

    name: str
    value: float
    strata: dict[str, float]
    claims: tuple[str, ...]


def prop1_functional(law: ObservedLaw) -> FunctionalResult:
    """Event-free arm contrast E(Y | A=1, D=0) - E(Y | A=0, D=0)."""
    strata = {}
    for a in (0, 1):
        p = event_probability(law, {"A": a, "D": 0})
        if p <= 0.0:
            raise PositivityError(f"{{A={a}, D=0}}")
        strata[f"A={a},D=0"] = p
    value = conditional_mean(law, "Y", {"A": 1, "D": 0}) - conditional_mean(
        law, "Y", {"A": 0, "D": 0}
    )
    return FunctionalResult(
        name="prop1",
        value=value,
        strata=strata,
        claims=("CSE(0)", "CSE(1)", "SACE"),
    )


def prop3_functional(law: ObservedLaw, a_prime: int) -> FunctionalResult:
    """Covariate-standardized event-free contrast.

    Within every covariate level observed among event-free units, contrast
    the arms; average the contrasts over the covariate distribution of the
    event-free units in arm ``a_prime``.
    """
    if "L" not in law.columns:
        raise ColumnError("the standardized contrast needs a covariate column L")
    if a_prime not in (0, 1):
        raise ValueError("a_prime must be 0 or 1")
    l_idx = law.column_index("L")
    levels = sorted({int(c) for c in law.codes[:, l_idx]})

    p_weight_arm = event_probability(law, {"A": a_prime, "D": 0})
    if p_weight_arm <= 0.0:
        raise PositivityError(f"{{A={a_prime}, D=0}}")

    value = 0.0
    strata = {}
    for l_val in levels:
        p_l = event_probability(law, {"D": 0, "L": l_val})
        if p_l <= 0.0:
            continue
        for a in (0, 1):
            p = event_probability(law, {"A": a, "D": 0, "L": l_val})
            if p <= 0.0:
                raise PositivityError(f"{{A={a}, D=0, L={l_val}}}")
            strata[f"A={a},D=0,L={l_val}"] = p
        contrast = conditional_mean(
            law, "Y", {"A": 1, "D": 0, "L": l_val}
        ) - conditional_mean(law, "Y", {"A": 0, "D": 0, "L": l_val})
        weight = (
            event_probability(law, {"A": a_prime, "D": 0, "L": l_val}) / p_weight_arm
        )
        value += contrast * weight
    return FunctionalResult(
        name=f"prop3({a_prime})",
        value=value,
        strata=strata,
        claims=(f"CSE({a_prime})",),
    )


@dataclass(frozen=True)
class PlugInEstimate:
    """Sample analogue of a functional with a delta-method standard error."""

    functional: str
    point: float
    standard_error: float
    n: int
    strata_n: dict[str, int]
    seed: int | None


def _stratum_stats(y: np.ndarray, label: str) -> tuple[float, float, int]:
    n = y.shape[0]
    if n == 0:
        raise EmptyStratumError(f"no observations in stratum {label}")
    if n < 2:
        raise EmptyStratumError(
            f"stratum {label} has a single observation, no variance estimate"
        )
    mean = float(y.mean())
    var = float(y.var(ddof=1))
    return mean, var, n


def plug_in(
    dataset: Dataset, functional: str = "prop1", a_prime: int = 0
) -> PlugInEstimate:
    """Estimate a functional by sample analogy.

    For the plain contrast the variance is the sum of the two stratum-mean
    variances.  For the standardized contrast the weights are estimated
    shares of a multinomial, and the variance adds the weighted between-level
    variance of the contrasts to the weighted within-level variances.
    """
    a = dataset.column("A")
    d = dataset.column("D")
    y = dataset.column("Y")

    if functional == "prop1":
        stats = {}
        strata_n = {}
        for arm in (0, 1):
            sel = (a == arm) & (d == 0)
            label = f"A={arm},D=0"
            stats[arm] = _stratum_stats(y[sel], label)
            strata_n[label] = stats[arm][2]
        point = stats[1][0] - stats[0][0]
        var = stats[1][1] / stats[1][2] + stats[0][1] / stats[0][2]
        return PlugInEstimate(
            functional="prop1",
            point=point,
            standard_error=float(np.sqrt(var)),
            n=dataset.n,
            strata_n=strata_n,
            seed=dataset.seed,
        )

    if functional == "prop3":
        if "L" not in dataset.columns:
            raise ColumnError("dataset has no covariate column L")
        if a_prime not in (0, 1):
            raise ValueError("a_prime must be 0 or 1")
        l_col = dataset.column("L")
        weight_sel = (a == a_prime) & (d == 0)
        n_weight = int(weight_sel.sum())
        if n_weight == 0:
            raise EmptyStratumError(f"no observations in stratum A={a_prime},D=0")
        levels = sorted(int(v) for v in np.unique(l_col[weight_sel]))
        point = 0.0
        weights = []
        contrasts = []
        var_within = 0.0
        strata_n = {}
        for l_val in levels:
            w = float(((l_col == l_val) & weight_sel).sum()) / n_weight
            means = {}
            variances = {}
            for arm in (0, 1):
                sel = (a == arm) & (d == 0) & (l_col == l_val)
                label = f"A={arm},D=0,L={l_val}"
                m, v, cnt = _stratum_stats(y[sel], label)
                means[arm] = m
                variances[arm] = v / cnt
                strata_n[label] = cnt
            contrast = means[1] - means[0]
            point += w * contrast
            var_within += w * w * (variances[1] + variances[0])
            weights.append(w)
            contrasts.append(contrast)
        # Multinomial weight noise: weighted variance of the level contrasts
        # around the point, scaled by the weighting stratum size.
        var_between = (
            sum(w * c * c for w, c in zip(weights, contrasts)) - point * point
        ) / n_weight
        var = var_within + max(var_between, 0.0)
        return PlugInEstimate(
            functional=f"prop3({a_prime})",
            point=point,
            standard_error=float(np.sqrt(var)),
            n=dataset.n,
            strata_n=strata_n,
            seed=dataset.seed,
        )

    raise ValueError(f"unknown functional {functional!r}; use 'prop1' or 'prop3'")
