"""Simultaneous position-momentum measurement models and their errors.

A measurement couples the system packet to a two-mode probe for a time
tau and reads the evolved probe quadratures Q2(tau) and P3(tau) as the
position and momentum meters.  This module assembles concrete models (the
four named minimum-trade-off families plus the Arthurs-Kelly comparator),
computes the noise-operator errors by two independent routes, and checks
the trade-off bounds and the achievability conditions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    E_ZERO_TOL,
    PropagatedTransform,
    SolvableGenerator,
    heisenberg_observables,
    numeric_expm,
    propagate,
)
from .phase_space import (
    GaussianState,
    LinearObservable,
    MinUncertaintyParams,
    commutator_coeff,
    make_min_uncertainty_state,
    make_probe_state,
    moments,
    position,
    momentum,
    tensor,
)

# meters must commute to this tolerance
METER_COMMUTATOR_ATOL = 1e-12

# the two error routes (explicit representation vs noise-operator moments)
# must agree to this tolerance
ERROR_ROUTE_ATOL = 1e-12

# residual tolerance for the achievability conditions
CONDITION_ATOL = 1e-9


class ModelFamily(enum.Enum):
    """Named measurement models."""

    X = "x"
    Y2 = "y2"
    Y0 = "y0"
    Z = "z"
    ARTHURS_KELLY = "ak"

    @classmethod
    def from_string(cls, text: str) -> "ModelFamily":
        try:
            return cls(text.strip().lower())
        except ValueError:
            valid = ", ".join(f.value for f in cls)
            raise ValueError(f"unknown family {text!r} (expected one of {valid})")


@dataclass(frozen=True)
class ModelRecipe:
    """Defining data of a minimum-trade-off family: time, couplings, probe scale."""

    tau: float
    gamma2: float
    e: float
    kappa: float


FAMILY_PARAMETERS = {
    ModelFamily.X: ModelRecipe(tau=math.pi / 2.0, gamma2=1.0, e=1.0, kappa=2.0),
    ModelFamily.Y2: ModelRecipe(tau=1.0, gamma2=2.0, e=0.0, kappa=4.0),
    ModelFamily.Y0: ModelRecipe(tau=1.0, gamma2=0.0, e=0.0, kappa=1.0),
    ModelFamily.Z: ModelRecipe(tau=math.log(2.0), gamma2=1.0, e=-1.0, kappa=2.0),
}

#: families whose per-outcome post-measurement states are known in closed form
POSTERIOR_FAMILIES = (ModelFamily.Y0, ModelFamily.Z)


@dataclass(frozen=True)
class ErrorPair:
    """Position and momentum q-rms errors of one measurement in one state."""

    eps_q: float
    eps_p: float

    def __post_init__(self):
        for name, val in (("eps_q", self.eps_q), ("eps_p", self.eps_p)):
            if not (np.isfinite(val) and val >= 0.0):
                raise ValueError(f"{name} must be finite and nonnegative, got {val}")


@dataclass(frozen=True, eq=False)
class LinearSimultaneousMeasurement:
    """A probe state plus a commuting meter pair for (Q1, P1).

    ``meter_q`` and ``meter_p`` are the evolved observables compared
    against Q1 and P1.  For the linear models they are Q2(tau) and
    P3(tau); the Arthurs-Kelly comparator supplies its own meter maps and
    carries no generator/transform.
    """

    probe: GaussianState
    meter_q: LinearObservable
    meter_p: LinearObservable
    tau: float
    generator: SolvableGenerator | None = None
    transform: PropagatedTransform | None = None

    def __post_init__(self):
        if set(self.probe.modes) != {2, 3}:
            raise ValueError(f"probe must live on modes (2, 3), got {self.probe.modes}")
        c = commutator_coeff(self.meter_q, self.meter_p)
        if abs(c) > METER_COMMUTATOR_ATOL:
            raise ValueError(f"meters do not commute: [Mq, Mp] = i*hbar*{c:g}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")


def coupling_time_factor(tau: float, gamma2: float, e: float) -> float:
    """The common factor tying nu to the couplings, per branch of E.

    Equal to ``sin(tau sqrt(E))/sqrt(E) + gamma2 (1-cos(tau sqrt(E)))/E``
    for positive E, its tau-polynomial limit at E = 0, and the hyperbolic
    counterpart for negative E.
    """
    if abs(e) < E_ZERO_TOL:
        return tau + 0.5 * gamma2 * tau**2
    if e > 0.0:
        root = math.sqrt(e)
        return math.sin(tau * root) / root + gamma2 * (1.0 - math.cos(tau * root)) / e
    root = math.sqrt(-e)
    return math.sinh(tau * root) / root + gamma2 * (math.cosh(tau * root) - 1.0) / (-e)


def solve_couplings(nu: float, tau: float, gamma2: float, e: float) -> tuple:
    """Couplings (alpha1, alpha3) placing the meter weights at (nu, 1-nu).

    Solves ``nu / alpha1 = (1 - nu) / (-alpha3) = F(tau, gamma2, E)``.

    Raises:
        ValueError: if nu is outside (0, 1), tau is not positive, or the
            time factor F vanishes (degenerate coupling, no solution).
    """
    if not 0.0 < nu < 1.0:
        raise ValueError(f"nu must lie strictly between 0 and 1, got {nu}")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    factor = coupling_time_factor(tau, gamma2, e)
    if abs(factor) < 1e-12:
        raise ValueError(
            f"time factor F(tau={tau:g}, gamma2={gamma2:g}, E={e:g}) = {factor:g} "
            "is degenerate; the couplings are undetermined"
        )
    return nu / factor, -(1.0 - nu) / factor


def build_model(
    family: ModelFamily, nu: float, psi: MinUncertaintyParams
) -> LinearSimultaneousMeasurement:
    """Assemble a minimum-trade-off model from its family recipe.

    Solves the coupling equations for the family's (tau, gamma2, E),
    propagates the generator, and attaches the probe state tuned to
    (nu, kappa).  The resulting transform has ``a21 = nu``,
    ``b31 = 1 - nu`` and ``a22 = kappa``.

    Args:
        family: one of X, Y2, Y0, Z (the comparator is built separately).
        nu: error split in (0, 1).
        psi: system packet the probe means/spreads are matched to.
    """
    if family not in FAMILY_PARAMETERS:
        raise ValueError(f"family {family} has no model recipe")
    recipe = FAMILY_PARAMETERS[family]
    alpha1, alpha3 = solve_couplings(nu, recipe.tau, recipe.gamma2, recipe.e)
    gen = SolvableGenerator.from_couplings(
        alpha1, alpha3, recipe.gamma2, recipe.e, recipe.tau
    )
    transform = propagate(gen)
    a21, a22 = transform.a[1, 0], transform.a[1, 1]
    if abs(a21 - nu) > 1e-10 or abs(a22 - recipe.kappa) > 1e-10:
        raise RuntimeError(
            f"propagated weights (a21={a21:g}, a22={a22:g}) drifted from "
            f"(nu={nu:g}, kappa={recipe.kappa:g})"
        )
    probe = make_probe_state(nu, recipe.kappa, psi)
    q_out, p_out = heisenberg_observables(transform)
    return LinearSimultaneousMeasurement(
        probe=probe,
        meter_q=q_out[1],
        meter_p=p_out[2],
        tau=recipe.tau,
        generator=gen,
        transform=transform,
    )


def measurement_from_parts(
    gen: SolvableGenerator, probe: GaussianState
) -> LinearSimultaneousMeasurement:
    """Wire an arbitrary solvable generator to an arbitrary probe state."""
    transform = propagate(gen)
    q_out, p_out = heisenberg_observables(transform)
    return LinearSimultaneousMeasurement(
        probe=probe,
        meter_q=q_out[1],
        meter_p=p_out[2],
        tau=gen.tau,
        generator=gen,
        transform=transform,
    )


def measurement_from_matrix(
    r: np.ndarray, tau: float, probe: GaussianState
) -> LinearSimultaneousMeasurement:
    """Wire a general (not necessarily solvable) generator to a probe.

    The transform pair comes from the numeric exponential; preservation of
    the canonical commutation relations is still enforced on construction.
    """
    r = np.asarray(r, dtype=float)
    transform = PropagatedTransform(
        a=numeric_expm(r, tau), b=numeric_expm(-r.T, tau), tau=tau
    )
    q_out, p_out = heisenberg_observables(transform)
    return LinearSimultaneousMeasurement(
        probe=probe,
        meter_q=q_out[1],
        meter_p=p_out[2],
        tau=tau,
        transform=transform,
    )


def arthurs_kelly_model(probe: GaussianState) -> LinearSimultaneousMeasurement:
    """The Arthurs-Kelly comparator with its explicit meter maps.

    The evolved meters are ``Q1 + Q2 + P3/2`` and ``P1 - P2/2 + Q3``;
    both noise operators live entirely on the probe, so the errors are
    independent of the system state and always satisfy the multiplicative
    error bound eps_q * eps_p >= hbar/2.
    """
    meter_q = position(1) + position(2) + 0.5 * momentum(3)
    meter_p = momentum(1) - 0.5 * momentum(2) + position(3)
    return LinearSimultaneousMeasurement(
        probe=probe, meter_q=meter_q, meter_p=meter_p, tau=1.0
    )


def noise_operators(m: LinearSimultaneousMeasurement) -> tuple:
    """Noise operators ``N_q = Mq - Q1`` and ``N_p = Mp - P1``."""
    return m.meter_q - position(1), m.meter_p - momentum(1)


def _qrms_one(
    noise: LinearObservable,
    system_state: GaussianState,
    probe: GaussianState,
    joint: GaussianState,
) -> float:
    """Squared q-rms error of one noise operator, by two routes.

    Route 1 splits the second moment over the product state: system-part
    variance + probe-part variance + squared total mean.  Route 2 is the
    direct second moment of the noise operator in the joint state.  Both
    must agree; route 1 (the explicit representation) is returned.
    """
    sys_part = noise.restrict({1})
    probe_part = noise.restrict({2, 3})
    _, var_sys = moments(system_state, sys_part)
    _, var_probe = moments(probe, probe_part)
    mean_joint, var_joint = moments(joint, noise)
    explicit = var_sys + var_probe + mean_joint**2
    direct = var_joint + mean_joint**2
    if abs(explicit - direct) > ERROR_ROUTE_ATOL * max(1.0, abs(explicit)):
        raise RuntimeError(
            f"error routes disagree: representation {explicit!r} vs "
            f"noise moment {direct!r}"
        )
    return explicit


def qrms_errors(
    m: LinearSimultaneousMeasurement, psi: MinUncertaintyParams
) -> ErrorPair:
    """Noise-operator q-rms errors of the measurement in the packet psi.

    ``eps(Q1)^2 = <N_q^2>`` and ``eps(P1)^2 = <N_p^2>`` in the product of
    the system packet and the probe state.
    """
    n_q, n_p = noise_operators(m)
    system_state = make_min_uncertainty_state(psi)
    joint = tensor(system_state, m.probe)
    eps_q_sq = _qrms_one(n_q, system_state, m.probe, joint)
    eps_p_sq = _qrms_one(n_p, system_state, m.probe, joint)
    return ErrorPair(eps_q=math.sqrt(eps_q_sq), eps_p=math.sqrt(eps_p_sq))


def branciard_ozawa_residual(errs: ErrorPair, psi: MinUncertaintyParams) -> float:
    """Left side minus right side of the quadratic error-trade-off bound.

    Returns ``eps_q^2 sigma(P1)^2 + sigma(Q1)^2 eps_p^2 - hbar^2/4``;
    nonnegative for every valid measurement, zero exactly at minimum
    trade-off.
    """
    lhs = errs.eps_q**2 * psi.sigma_p**2 + psi.sigma_q**2 * errs.eps_p**2
    return lhs - psi.hbar**2 / 4.0


def heisenberg_product(errs: ErrorPair) -> float:
    """The multiplicative error product ``eps_q * eps_p``."""
    return errs.eps_q * errs.eps_p


def lower_bound_l(a21: float, b31: float) -> float:
    """Meter-weight lower-bound function for the trade-off proof.

    ``l(a21, b31) = ((a21-1)^2 + (b31-1)^2)/4 + |a21 b31|/2``; its global
    minimum 1/4 is attained exactly on the segment a21, b31 >= 0 with
    a21 + b31 = 1.
    """
    return ((a21 - 1.0) ** 2 + (b31 - 1.0) ** 2) / 4.0 + abs(a21 * b31) / 2.0


def ozawa_inequality_residual(errs: ErrorPair, psi: MinUncertaintyParams) -> float:
    """Slack of the additive error-spread inequality.

    Returns ``eps_q eps_p + eps_q sigma(P1) + sigma(Q1) eps_p - hbar/2``;
    nonnegative for every measurement of the canonical pair in a pure
    state.
    """
    lhs = (
        errs.eps_q * errs.eps_p
        + errs.eps_q * psi.sigma_p
        + psi.sigma_q * errs.eps_p
    )
    return lhs - psi.hbar / 2.0


def arthurs_kelly_errors(probe: GaussianState) -> ErrorPair:
    """Errors of the Arthurs-Kelly comparator for a given probe.

    The noise operators are pure probe observables ``Q2 + P3/2`` and
    ``-P2/2 + Q3``, so each squared error is the probe second moment of
    the corresponding combination.
    """
    n_q = position(2) + 0.5 * momentum(3)
    n_p = -0.5 * momentum(2) + position(3)
    out = []
    for noise in (n_q, n_p):
        mean, var = moments(probe, noise)
        out.append(math.sqrt(var + mean**2))
    return ErrorPair(eps_q=out[0], eps_p=out[1])


@dataclass(frozen=True)
class TheoremReport:
    """Residuals of the three achievability conditions plus the bound slack.

    ``cond_i_residuals`` are the noise-operator means (must vanish);
    ``cond_ii_residuals`` compare probe-part spreads against
    ``sqrt(|a21 b31|)`` times the packet spreads; ``cond_iii`` records
    (a21, b31, a21 + b31 - 1).  ``bo_residual`` is the quadratic bound
    slack for the same measurement.
    """

    cond_i_residuals: tuple
    cond_ii_residuals: tuple
    cond_iii: tuple
    passes_i: bool
    passes_ii: bool
    passes_iii: bool
    bo_residual: float

    @property
    def all_pass(self) -> bool:
        return self.passes_i and self.passes_ii and self.passes_iii

    def as_dict(self) -> dict:
        return {
            "cond_i_residuals": list(self.cond_i_residuals),
            "cond_ii_residuals": list(self.cond_ii_residuals),
            "cond_iii": {
                "a21": self.cond_iii[0],
                "b31": self.cond_iii[1],
                "sum_minus_one": self.cond_iii[2],
            },
            "passes": {
                "i": self.passes_i,
                "ii": self.passes_ii,
                "iii": self.passes_iii,
                "all": self.all_pass,
            },
            "bo_residual": self.bo_residual,
        }


def check_theorem_conditions(
    m: LinearSimultaneousMeasurement,
    psi: MinUncertaintyParams,
    tol: float = CONDITION_ATOL,
) -> TheoremReport:
    """Evaluate the three conditions characterizing minimum trade-off.

    (i) both noise operators have zero mean in the product state;
    (ii) the probe parts of the meters have spreads
    ``sqrt(|a21 b31|) sigma(Q1)`` and ``sqrt(|a21 b31|) sigma(P1)``;
    (iii) the meter weights satisfy a21 > 0, b31 > 0, a21 + b31 = 1.
    All three hold together exactly when the quadratic bound is saturated.
    """
    n_q, n_p = noise_operators(m)
    system_state = make_min_uncertainty_state(psi)
    joint = tensor(system_state, m.probe)

    mean_q, _ = moments(joint, n_q)
    mean_p, _ = moments(joint, n_p)

    a21 = float(m.meter_q.coeff_q[0])
    b31 = float(m.meter_p.coeff_p[0])
    weight = math.sqrt(abs(a21 * b31))
    _, var_probe_q = moments(m.probe, m.meter_q.restrict({2, 3}))
    _, var_probe_p = moments(m.probe, m.meter_p.restrict({2, 3}))
    res_ii_q = math.sqrt(var_probe_q) - weight * psi.sigma_q
    res_ii_p = math.sqrt(var_probe_p) - weight * psi.sigma_p

    sum_res = a21 + b31 - 1.0
    passes_iii = a21 > 0.0 and b31 > 0.0 and abs(sum_res) <= tol

    errs = qrms_errors(m, psi)
    return TheoremReport(
        cond_i_residuals=(mean_q, mean_p),
        cond_ii_residuals=(res_ii_q, res_ii_p),
        cond_iii=(a21, b31, sum_res),
        passes_i=abs(mean_q) <= tol and abs(mean_p) <= tol,
        passes_ii=abs(res_ii_q) <= tol and abs(res_ii_p) <= tol,
        passes_iii=passes_iii,
        bo_residual=branciard_ozawa_residual(errs, psi),
    )
