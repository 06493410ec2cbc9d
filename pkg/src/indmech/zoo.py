"""Ready-made models: worked examples, a calibrated trial, and random families.

Every builder returns a validated model with the full role map.  Default
parameters are fixed reference choices; the test suite pins the quantities
they imply as frozen regression values.  All parameters can be overridden
within the stated ranges.

The helper :func:`shared_threshold_noise` encodes a conditional Bernoulli
table through one uniform-like noise variable with nested thresholds.  Cells
with larger probabilities then fire on a superset of configurations, which
is exactly the coupling that makes ordered probabilities pointwise monotone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, InvalidModelError, PositivityError
from .model import (
    FiniteVariable,
    Intervention,
    Mechanism,
    NoiseSpec,
    StructuralModel,
    tabulate,
    validate_model,
)
from .worlds import conditional_mean, counterfactual_joint, event_probability, observed_law

FIXTURE_NAMES = ("toy1", "toy1V", "pie", "with-l", "adherence", "birthweight")


def _coin(name: str, p: float) -> tuple[FiniteVariable, NoiseSpec]:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name}: probability {p!r} outside [0, 1]")
    var = FiniteVariable(name, (0, 1), "exogenous")
    return var, NoiseSpec(name, (1.0 - p, p))


def _uniform(name: str, k: int) -> tuple[FiniteVariable, NoiseSpec]:
    var = FiniteVariable(name, tuple(range(k)), "exogenous")
    return var, NoiseSpec(name, (1.0 / k,) * k)


def shared_threshold_noise(
    name: str, cells: dict[tuple, float]
) -> tuple[FiniteVariable, NoiseSpec, dict[tuple, int]]:
    """One noise variable realizing P(event | cell) for every cell at once.

    Returns the variable, its weights, and a rank per cell: the event fires
    in a cell exactly when the noise code is below that cell's rank.  Cells
    with equal probabilities share a rank, so their events coincide
    configuration by configuration.
    """
    for cell, p in cells.items():
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name}: cell {cell!r} probability {p!r} outside [0, 1]")
    thresholds = sorted(set(cells.values()))
    weights = []
    prev = 0.0
    for q in thresholds:
        weights.append(q - prev)
        prev = q
    weights.append(1.0 - prev)
    ranks = {cell: thresholds.index(p) + 1 for cell, p in cells.items()}
    var = FiniteVariable(name, tuple(range(len(weights))), "exogenous")
    return var, NoiseSpec(name, tuple(weights)), ranks


def _treatment_block(p_a: float):
    """Randomized treatment plus its two recorded components."""
    eps_a, w_a = _coin("eps_a", p_a)
    a = FiniteVariable("A", (0, 1), "endogenous")
    a_d = FiniteVariable("A_D", (0, 1), "endogenous")
    a_y = FiniteVariable("A_Y", (0, 1), "endogenous")
    mechs = {
        "A": tabulate("A", [eps_a], lambda e: e),
        "A_D": tabulate("A_D", [a], lambda x: x),
        "A_Y": tabulate("A_Y", [a], lambda x: x),
    }
    return [eps_a, a, a_d, a_y], {"eps_a": w_a}, mechs


def _finish(variables, noise, mechanisms, roles, truncation) -> StructuralModel:
    model = StructuralModel(
        variables=tuple(variables),
        noise=noise,
        mechanisms=mechanisms,
        roles=roles,
        truncation=truncation,
    )
    report = validate_model(model)
    if not report.ok:
        raise InvalidModelError(report)
    return model


_FULL_ROLES = {
    "A": "A", "A_D": "A_D", "A_Y": "A_Y", "D_A": "D_A", "D": "D", "Y": "Y", "U": "U",
}


def _check_thresholds(limit: int, **named: int) -> None:
    for key, value in named.items():
        if not isinstance(value, int) or value < 0:
            raise ValueError(f"{key} must be a nonnegative integer, got {value!r}")
    total = sum(named.values())
    if total > limit:
        raise ValueError(
            f"threshold sum {total} exceeds the noise range {limit}; "
            "the implied probability would leave [0, 1]"
        )


def build_surgery(
    p_u: float = 0.5,
    p_a: float = 0.5,
    side_threshold: int = 1,
    p_d: float = 0.5,
    y_base: int = 3,
    y_treat: int = 4,
    y_frail: int = 2,
) -> StructuralModel:
    """Two-arm trial where only the treated can suffer the side effect.

    Treatment harms survival through a side-effect channel alone (rate
    ``side_threshold / 5`` among the treated), frailty U both kills and
    lowers the outcome, and the outcome is undefined for the dead.  With
    the defaults the event-free contrast equals the true outcome effect.
    """
    if not 0 <= side_threshold <= 5:
        raise ValueError("side_threshold must lie in 0..5")
    _check_thresholds(10, y_base=y_base, y_treat=y_treat, y_frail=y_frail)
    tvars, noise, mechs = _treatment_block(p_a)
    u, w_u = _coin("U", p_u)
    eps_da, w_da = _uniform("eps_da", 5)
    eps_d, w_d = _coin("eps_d", p_d)
    eps_y, w_y = _uniform("eps_y", 10)
    noise.update({"U": w_u, "eps_da": w_da, "eps_d": w_d, "eps_y": w_y})

    d_a = FiniteVariable("D_A", (0, 1), "endogenous")
    d = FiniteVariable("D", (0, 1), "endogenous")
    y = FiniteVariable("Y", (0, 1), "endogenous")
    a_d = tvars[2]
    a_y = tvars[3]
    mechs["D_A"] = tabulate(
        "D_A", [a_d, eps_da], lambda ad, e: int(ad == 1 and e < side_threshold)
    )
    mechs["D"] = tabulate(
        "D", [d_a, u, eps_d], lambda da, uu, e: int(da == 1 or (uu == 1 and e == 1))
    )
    mechs["Y"] = tabulate(
        "Y", [a_y, u, eps_y],
        lambda ay, uu, e: int(e < y_base + y_treat * ay + y_frail * uu),
    )
    variables = [u] + tvars + [eps_da, d_a, eps_d, d, eps_y, y]
    return _finish(variables, noise, mechs, dict(_FULL_ROLES), truncation=True)


def build_violation(
    p_u: float = 0.5,
    p_a: float = 0.5,
    side_threshold_u0: int = 0,
    side_threshold_u1: int = 2,
    p_d: float = 0.5,
    y_base: int = 3,
    y_treat: int = 4,
    y_frail: int = 2,
) -> StructuralModel:
    """The surgery trial with the side effect wired to frailty.

    Identical to :func:`build_surgery` except that the side-effect rate
    among the treated depends on U (``side_threshold_u0 / 5`` for U=0,
    ``side_threshold_u1 / 5`` for U=1).  Setting both thresholds to the
    same value switches the violation off and reproduces the clean trial.
    """
    for t in (side_threshold_u0, side_threshold_u1):
        if not 0 <= t <= 5:
            raise ValueError("side thresholds must lie in 0..5")
    _check_thresholds(10, y_base=y_base, y_treat=y_treat, y_frail=y_frail)
    tvars, noise, mechs = _treatment_block(p_a)
    u, w_u = _coin("U", p_u)
    eps_da, w_da = _uniform("eps_da", 5)
    eps_d, w_d = _coin("eps_d", p_d)
    eps_y, w_y = _uniform("eps_y", 10)
    noise.update({"U": w_u, "eps_da": w_da, "eps_d": w_d, "eps_y": w_y})

    d_a = FiniteVariable("D_A", (0, 1), "endogenous")
    d = FiniteVariable("D", (0, 1), "endogenous")
    y = FiniteVariable("Y", (0, 1), "endogenous")
    a_d = tvars[2]
    a_y = tvars[3]
    thr = (side_threshold_u0, side_threshold_u1)
    mechs["D_A"] = tabulate(
        "D_A", [a_d, u, eps_da], lambda ad, uu, e: int(ad == 1 and e < thr[uu])
    )
    mechs["D"] = tabulate(
        "D", [d_a, u, eps_d], lambda da, uu, e: int(da == 1 or (uu == 1 and e == 1))
    )
    mechs["Y"] = tabulate(
        "Y", [a_y, u, eps_y],
        lambda ay, uu, e: int(e < y_base + y_treat * ay + y_frail * uu),
    )
    variables = [u] + tvars + [eps_da, d_a, eps_d, d, eps_y, y]
    return _finish(variables, noise, mechs, dict(_FULL_ROLES), truncation=True)


def build_pie(
    p0: float = 0.1,
    p1: float = 0.2,
    p2: float = 0.3,
    p3: float = 0.1,
    p4: float = 0.3,
    p5: float = 0.2,
    p_u: float = 0.5,
    p_a: float = 0.5,
    y_base: int = 3,
    y_treat: int = 4,
    y_frail: int = 2,
) -> StructuralModel:
    """Sufficient-component-cause wiring of the event.

    Six independent binary switches assemble the event precursor and the
    event: ``D_A = d0 or (d1 and A) or (d2 and not A)`` and
    ``D = D_A or d3 or (U and d4) or (not U and d5)``.  Survival still
    factorizes into a treatment-arm factor and a frailty factor, while a
    positive ``p2`` lets the control arm suffer precursor events the
    treated arm avoids.
    """
    _check_thresholds(10, y_base=y_base, y_treat=y_treat, y_frail=y_frail)
    tvars, noise, mechs = _treatment_block(p_a)
    u, w_u = _coin("U", p_u)
    deltas = []
    for i, p in enumerate((p0, p1, p2, p3, p4, p5)):
        var, w = _coin(f"delta{i}", p)
        deltas.append(var)
        noise[var.name] = w
    eps_y, w_y = _uniform("eps_y", 10)
    noise.update({"U": w_u, "eps_y": w_y})

    d_a = FiniteVariable("D_A", (0, 1), "endogenous")
    d = FiniteVariable("D", (0, 1), "endogenous")
    y = FiniteVariable("Y", (0, 1), "endogenous")
    a_d = tvars[2]
    a_y = tvars[3]
    mechs["D_A"] = tabulate(
        "D_A", [a_d, deltas[0], deltas[1], deltas[2]],
        lambda ad, d0, d1, d2: int(
            d0 == 1 or (d1 == 1 and ad == 1) or (d2 == 1 and ad == 0)
        ),
    )
    mechs["D"] = tabulate(
        "D", [d_a, u, deltas[3], deltas[4], deltas[5]],
        lambda da, uu, d3, d4, d5: int(
            da == 1 or d3 == 1 or (uu == 1 and d4 == 1) or (uu == 0 and d5 == 1)
        ),
    )
    mechs["Y"] = tabulate(
        "Y", [a_y, u, eps_y],
        lambda ay, uu, e: int(e < y_base + y_treat * ay + y_frail * uu),
    )
    variables = [u] + tvars + deltas + [d_a, d, eps_y, y]
    return _finish(variables, noise, mechs, dict(_FULL_ROLES), truncation=True)


def build_with_l(
    p_u: float = 0.5,
    p_a: float = 0.5,
    l_base: int = 3,
    l_treat: int = 3,
    da_base: int = 2,
    da_l: int = 3,
    d_l: int = 2,
    d_u: int = 3,
    y_base: int = 1,
    y_treat: int = 3,
    y_l: int = 2,
    y_u: int = 3,
) -> StructuralModel:
    """Trial with a recorded post-treatment covariate on the event pathway.

    L responds to the treatment component (rate ``(l_base + l_treat*A_D)/10``)
    and feeds the precursor, the event, and the outcome, so the unadjusted
    event-free contrast mixes arms with different L compositions while the
    L-standardized one does not.  Setting ``l_base = l_treat = 0`` collapses
    L to a single value.

    Raises PositivityError at build time if some reachable (D=0, L) stratum
    misses one treatment arm entirely.
    """
    _check_thresholds(10, l_base=l_base, l_treat=l_treat)
    _check_thresholds(10, da_base=da_base, da_l=da_l)
    _check_thresholds(10, d_l=d_l, d_u=d_u)
    _check_thresholds(10, y_base=y_base, y_treat=y_treat, y_l=y_l, y_u=y_u)
    tvars, noise, mechs = _treatment_block(p_a)
    u, w_u = _coin("U", p_u)
    eps_l, w_l = _uniform("eps_l", 10)
    eps_da, w_da = _uniform("eps_da", 10)
    eps_d, w_d = _uniform("eps_d", 10)
    eps_y, w_y = _uniform("eps_y", 10)
    noise.update(
        {"U": w_u, "eps_l": w_l, "eps_da": w_da, "eps_d": w_d, "eps_y": w_y}
    )

    l_var = FiniteVariable("L", (0, 1), "endogenous")
    d_a = FiniteVariable("D_A", (0, 1), "endogenous")
    d = FiniteVariable("D", (0, 1), "endogenous")
    y = FiniteVariable("Y", (0, 1), "endogenous")
    a_d = tvars[2]
    a_y = tvars[3]
    mechs["L"] = tabulate(
        "L", [a_d, eps_l], lambda ad, e: int(e < l_base + l_treat * ad)
    )
    mechs["D_A"] = tabulate(
        "D_A", [a_d, l_var, eps_da],
        lambda ad, ll, e: int(ad == 1 and e < da_base + da_l * ll),
    )
    mechs["D"] = tabulate(
        "D", [d_a, l_var, u, eps_d],
        lambda da, ll, uu, e: int(da == 1 or e < d_l * ll + d_u * uu),
    )
    mechs["Y"] = tabulate(
        "Y", [a_y, l_var, u, eps_y],
        lambda ay, ll, uu, e: int(e < y_base + y_treat * ay + y_l * ll + y_u * uu),
    )
    roles = dict(_FULL_ROLES)
    roles["L"] = "L"
    variables = [u] + tvars + [eps_l, l_var, eps_da, d_a, eps_d, d, eps_y, y]
    model = _finish(variables, noise, mechs, roles, truncation=True)

    law = observed_law(model)
    for l_val in model.variable("L").support:
        if event_probability(law, {"D": 0, "L": l_val}) <= 0.0:
            continue
        for a in (0, 1):
            if event_probability(law, {"D": 0, "L": l_val, "A": a}) <= 0.0:
                raise PositivityError(
                    f"(A8) stratum {{D=0, L={l_val}, A={a}}}"
                )
    return model


def build_birthweight(
    p_u: float = 0.1,
    p_a: float = 0.5,
    da_threshold: int = 3,
    y_base: int = 1,
    y_treat: int = 2,
    y_frail: int = 30,
) -> StructuralModel:
    """Exposure that causes the event, plus a frailty that causes both.

    The event here is a state (for instance low birth weight), not death:
    the outcome stays defined everywhere, which is what lets the within-event
    contrast be computed and be misleading.  The exposure slightly harms the
    outcome everywhere; frailty raises the outcome risk a lot and also
    produces the event on its own.
    """
    if not 0 <= da_threshold <= 10:
        raise ValueError("da_threshold must lie in 0..10")
    _check_thresholds(100, y_base=y_base, y_treat=y_treat, y_frail=y_frail)
    tvars, noise, mechs = _treatment_block(p_a)
    u, w_u = _coin("U", p_u)
    eps_da, w_da = _uniform("eps_da", 10)
    eps_y, w_y = _uniform("eps_y", 100)
    noise.update({"U": w_u, "eps_da": w_da, "eps_y": w_y})

    d_a = FiniteVariable("D_A", (0, 1), "endogenous")
    d = FiniteVariable("D", (0, 1), "endogenous")
    y = FiniteVariable("Y", (0, 1), "endogenous")
    a_d = tvars[2]
    a_y = tvars[3]
    mechs["D_A"] = tabulate(
        "D_A", [a_d, eps_da], lambda ad, e: int(ad == 1 and e < da_threshold)
    )
    mechs["D"] = tabulate("D", [d_a, u], lambda da, uu: int(da == 1 or uu == 1))
    mechs["Y"] = tabulate(
        "Y", [a_y, u, eps_y],
        lambda ay, uu, e: int(e < y_base + y_treat * ay + y_frail * uu),
    )
    variables = [u] + tvars + [eps_da, d_a, d, eps_y, y]
    return _finish(variables, noise, mechs, dict(_FULL_ROLES), truncation=False)


@dataclass(frozen=True)
class CalibrationTargets:
    """Observed moments a calibrated trial model must reproduce."""

    survival_a1: float = 0.225
    survival_a0: float = 0.399
    mean_y_a1: float = 0.107
    mean_y_a0: float = 0.156

    def as_dict(self) -> dict[str, float]:
        return {
            "survival_a1": self.survival_a1,
            "survival_a0": self.survival_a0,
            "mean_y_a1": self.mean_y_a1,
            "mean_y_a0": self.mean_y_a0,
        }


# Fixed shape constants of the calibrated family: the adherence rate for
# U=1 is twice the U=0 rate, non-adherence multiplies the abstinence
# probability by 0.6, and U=1 multiplies it by 0.7.
_ADH_Q_RATIO = 2.0
_ADH_M = (1.0, 0.6)
_ADH_G = (1.0, 0.7)


def _assemble_adherence(q0: float, p_side: float, t1: float, t0: float) -> StructuralModel:
    tvars, noise, mechs = _treatment_block(0.5)
    u, w_u = _coin("U", 0.5)
    eps_da, w_da = _coin("eps_da", p_side)
    noise.update({"U": w_u, "eps_da": w_da})

    d_cells = {(0,): q0, (1,): min(_ADH_Q_RATIO * q0, 1.0)}
    eps_d, w_d, d_ranks = shared_threshold_noise("eps_d", d_cells)
    noise["eps_d"] = w_d

    t = (t0, t1)
    y_cells = {
        (ay, dd, uu): t[ay] * _ADH_M[dd] * _ADH_G[uu]
        for ay in (0, 1)
        for dd in (0, 1)
        for uu in (0, 1)
    }
    eps_y, w_y, y_ranks = shared_threshold_noise("eps_y", y_cells)
    noise["eps_y"] = w_y

    d_a = FiniteVariable("D_A", (0, 1), "endogenous")
    d = FiniteVariable("D", (0, 1), "endogenous")
    y = FiniteVariable("Y", (0, 1), "endogenous")
    m = FiniteVariable("M", (0, 1), "endogenous")
    a_var = tvars[1]
    a_d = tvars[2]
    a_y = tvars[3]
    mechs["D_A"] = tabulate("D_A", [a_d, eps_da], lambda ad, e: int(ad == 1 and e == 1))
    mechs["D"] = tabulate(
        "D", [d_a, u, eps_d],
        lambda da, uu, e: int(da == 1 or e < d_ranks[(uu,)]),
    )
    mechs["Y"] = tabulate(
        "Y", [a_y, d, u, eps_y],
        lambda ay, dd, uu, e: int(e < y_ranks[(ay, dd, uu)]),
    )
    mechs["M"] = tabulate("M", [a_var, d], lambda a, dd: int(a != dd))
    roles = dict(_FULL_ROLES)
    roles["M"] = "M"
    variables = [u] + tvars + [eps_da, d_a, eps_d, d, eps_y, y, m]
    return _finish(variables, noise, mechs, roles, truncation=False)


def calibration_moments(model: StructuralModel) -> dict[str, float]:
    law = observed_law(model)
    out = {}
    for a in (0, 1):
        pa = event_probability(law, {"A": a})
        out[f"survival_a{a}"] = event_probability(law, {"A": a, "D": 0}) / pa
        out[f"mean_y_a{a}"] = conditional_mean(law, "Y", {"A": a})
    return out


def _bisect(eval_moment, lo: float, hi: float, target: float, label: str) -> float:
    f_lo = eval_moment(lo)
    f_hi = eval_moment(hi)
    for x, fx in ((lo, f_lo), (hi, f_hi)):
        if abs(fx - target) <= 1e-12:
            return x
    if not (min(f_lo, f_hi) <= target <= max(f_lo, f_hi)):
        best = lo if abs(f_lo - target) <= abs(f_hi - target) else hi
        raise CalibrationError(
            f"target {label}={target} is outside the attainable range "
            f"[{min(f_lo, f_hi):.6f}, {max(f_lo, f_hi):.6f}]",
            params={label: best},
            residuals={label: min(abs(f_lo - target), abs(f_hi - target))},
        )
    increasing = f_hi > f_lo
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        f_mid = eval_moment(mid)
        if abs(f_mid - target) <= 1e-13 or hi - lo < 1e-14:
            return mid
        if (f_mid < target) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def build_adherence(
    targets: CalibrationTargets | None = None, tolerance: float = 1e-6
) -> StructuralModel:
    """Two-arm trial calibrated to observed adherence and outcome moments.

    Solves for the adherence level, the treated-only side channel, and the
    two arm-specific outcome levels by nested bisection, each step scoring
    candidate parameters on the exact law of the assembled model.  Raises
    CalibrationError, carrying the best residuals, if the targets cannot be
    met within ``tolerance``.
    """
    targets = targets or CalibrationTargets()

    def d0_moment(q0: float) -> float:
        return calibration_moments(_assemble_adherence(q0, 0.0, 0.5, 0.5))["survival_a0"]

    q0 = _bisect(d0_moment, 0.0, 0.5, targets.survival_a0, "survival_a0")

    def d1_moment(p_side: float) -> float:
        return calibration_moments(_assemble_adherence(q0, p_side, 0.5, 0.5))["survival_a1"]

    p_side = _bisect(d1_moment, 0.0, 1.0, targets.survival_a1, "survival_a1")

    def y1_moment(t1: float) -> float:
        return calibration_moments(_assemble_adherence(q0, p_side, t1, 0.5))["mean_y_a1"]

    t1 = _bisect(y1_moment, 0.0, 1.0, targets.mean_y_a1, "mean_y_a1")

    def y0_moment(t0: float) -> float:
        return calibration_moments(_assemble_adherence(q0, p_side, t1, t0))["mean_y_a0"]

    t0 = _bisect(y0_moment, 0.0, 1.0, targets.mean_y_a0, "mean_y_a0")

    model = _assemble_adherence(q0, p_side, t1, t0)
    moments = calibration_moments(model)
    residuals = {
        key: abs(moments[key] - want) for key, want in targets.as_dict().items()
    }
    if max(residuals.values()) > tolerance:
        raise CalibrationError(
            "calibration did not reach the targets",
            params={"q0": q0, "p_side": p_side, "t1": t1, "t0": t0},
            residuals=residuals,
        )
    return model


def _fixture_builders():
    return {
        "toy1": build_surgery,
        "toy1v": build_violation,
        "pie": build_pie,
        "with-l": build_with_l,
        "adherence": build_adherence,
        "birthweight": build_birthweight,
    }


def build_fixture(name: str) -> StructuralModel:
    """Build one of the named default fixtures (case-insensitive)."""
    builders = _fixture_builders()
    key = name.lower()
    if key not in builders:
        raise ValueError(
            f"unknown fixture {name!r}; choose one of {', '.join(FIXTURE_NAMES)}"
        )
    return builders[key]()


def random_fig4_model(
    rng: np.random.Generator, monotone: bool = False
) -> StructuralModel:
    """Random instance of the two-arm truncation structure.

    Margins are drawn from interior ranges and the draw is rejected until
    every (A, D=0) stratum holds at least 1% probability and the doubly
    event-free stratum at least 0.5%, so positivity is never borderline.
    A ``monotone`` draw orders the precursor thresholds, which under the
    shared-noise coupling makes the precursor pointwise monotone.
    """
    for _ in range(1000):
        p_a = float(rng.uniform(0.3, 0.7))
        p_u = float(rng.uniform(0.1, 0.9))
        r0, r1 = (float(x) for x in rng.uniform(0.02, 0.9, 2))
        if monotone and r1 < r0:
            r0, r1 = r1, r0
        s0, s1 = (float(x) for x in rng.uniform(0.02, 0.9, 2))
        y_cells = {
            (ay, uu): float(rng.uniform(0.05, 0.95))
            for ay in (0, 1)
            for uu in (0, 1)
        }

        tvars, noise, mechs = _treatment_block(p_a)
        u, w_u = _coin("U", p_u)
        eps_da, w_da, da_ranks = shared_threshold_noise("eps_da", {(0,): r0, (1,): r1})
        eps_d, w_d, d_ranks = shared_threshold_noise("eps_d", {(0,): s0, (1,): s1})
        eps_y, w_y, y_ranks = shared_threshold_noise("eps_y", y_cells)
        noise.update({"U": w_u, "eps_da": w_da, "eps_d": w_d, "eps_y": w_y})

        d_a = FiniteVariable("D_A", (0, 1), "endogenous")
        d = FiniteVariable("D", (0, 1), "endogenous")
        y = FiniteVariable("Y", (0, 1), "endogenous")
        a_d = tvars[2]
        a_y = tvars[3]
        mechs["D_A"] = tabulate(
            "D_A", [a_d, eps_da], lambda ad, e: int(e < da_ranks[(ad,)])
        )
        mechs["D"] = tabulate(
            "D", [d_a, u, eps_d],
            lambda da, uu, e: int(da == 1 or e < d_ranks[(uu,)]),
        )
        mechs["Y"] = tabulate(
            "Y", [a_y, u, eps_y], lambda ay, uu, e: int(e < y_ranks[(ay, uu)])
        )
        variables = [u] + tvars + [eps_da, d_a, eps_d, d, eps_y, y]
        model = _finish(variables, noise, mechs, dict(_FULL_ROLES), truncation=True)

        law = observed_law(model)
        if min(
            event_probability(law, {"A": a, "D": 0}) for a in (0, 1)
        ) < 0.01:
            continue
        wt = counterfactual_joint(
            model, [Intervention({"A": 0}), Intervention({"A": 1})]
        )
        if event_probability(wt, {("D", 0): 0, ("D", 1): 0}) < 0.005:
            continue
        return model
    raise RuntimeError("could not draw a model meeting the positivity margins")


def random_fig7_model(rng: np.random.Generator) -> StructuralModel:
    """Random instance of the structure with a recorded covariate L."""
    for _ in range(1000):
        p_a = float(rng.uniform(0.3, 0.7))
        p_u = float(rng.uniform(0.1, 0.9))
        l_cells = {(ad,): float(rng.uniform(0.2, 0.8)) for ad in (0, 1)}
        da_cells = {
            (ad, ll): float(rng.uniform(0.02, 0.9))
            for ad in (0, 1)
            for ll in (0, 1)
        }
        d_cells = {
            (ll, uu): float(rng.uniform(0.02, 0.9))
            for ll in (0, 1)
            for uu in (0, 1)
        }
        y_cells = {
            (ay, ll, uu): float(rng.uniform(0.05, 0.95))
            for ay in (0, 1)
            for ll in (0, 1)
            for uu in (0, 1)
        }

        tvars, noise, mechs = _treatment_block(p_a)
        u, w_u = _coin("U", p_u)
        eps_l, w_l, l_ranks = shared_threshold_noise("eps_l", l_cells)
        eps_da, w_da, da_ranks = shared_threshold_noise("eps_da", da_cells)
        eps_d, w_d, d_ranks = shared_threshold_noise("eps_d", d_cells)
        eps_y, w_y, y_ranks = shared_threshold_noise("eps_y", y_cells)
        noise.update(
            {"U": w_u, "eps_l": w_l, "eps_da": w_da, "eps_d": w_d, "eps_y": w_y}
        )

        l_var = FiniteVariable("L", (0, 1), "endogenous")
        d_a = FiniteVariable("D_A", (0, 1), "endogenous")
        d = FiniteVariable("D", (0, 1), "endogenous")
        y = FiniteVariable("Y", (0, 1), "endogenous")
        a_d = tvars[2]
        a_y = tvars[3]
        mechs["L"] = tabulate("L", [a_d, eps_l], lambda ad, e: int(e < l_ranks[(ad,)]))
        mechs["D_A"] = tabulate(
            "D_A", [a_d, l_var, eps_da],
            lambda ad, ll, e: int(e < da_ranks[(ad, ll)]),
        )
        mechs["D"] = tabulate(
            "D", [d_a, l_var, u, eps_d],
            lambda da, ll, uu, e: int(da == 1 or e < d_ranks[(ll, uu)]),
        )
        mechs["Y"] = tabulate(
            "Y", [a_y, l_var, u, eps_y],
            lambda ay, ll, uu, e: int(e < y_ranks[(ay, ll, uu)]),
        )
        roles = dict(_FULL_ROLES)
        roles["L"] = "L"
        variables = [u] + tvars + [eps_l, l_var, eps_da, d_a, eps_d, d, eps_y, y]
        model = _finish(variables, noise, mechs, roles, truncation=True)

        law = observed_law(model)
        margins = [
            event_probability(law, {"A": a, "D": 0, "L": ll})
            for a in (0, 1)
            for ll in (0, 1)
        ]
        if min(margins) < 0.005:
            continue
        return model
    raise RuntimeError("could not draw a model meeting the positivity margins")
