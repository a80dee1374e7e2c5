"""Shared helpers: random model generators and frozen closed-form matrices."""

import numpy as np
from scipy.linalg import expm as scipy_expm

from simqp import (
    GaussianState,
    MinUncertaintyParams,
    ModelFamily,
    SolvableGenerator,
    make_probe_state,
    measurement_from_parts,
    propagate,
    solve_couplings,
)

FAMILIES = (ModelFamily.X, ModelFamily.Y2, ModelFamily.Y0, ModelFamily.Z)

# symplectic form for the probe ordering (Q2, Q3, P2, P3)
OMEGA = np.block(
    [[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]]
)


def random_solvable_generator(rng) -> SolvableGenerator:
    """Random member of the closed-form-solvable generator class."""
    gamma2 = rng.uniform(-1.5, 1.5)
    e = rng.uniform(-2.0, 2.0)
    alpha1 = rng.uniform(0.2, 2.0) * rng.choice([-1.0, 1.0])
    alpha3 = rng.uniform(0.2, 2.0) * rng.choice([-1.0, 1.0])
    tau = rng.uniform(0.2, 2.0)
    return SolvableGenerator.from_couplings(alpha1, alpha3, gamma2, e, tau)


def random_pure_probe(rng, hbar: float = 1.0) -> GaussianState:
    """Random pure Gaussian probe: covariance (hbar/2) S S^T, S symplectic."""
    h = rng.normal(scale=0.4, size=(4, 4))
    h = 0.5 * (h + h.T)
    sp = scipy_expm(OMEGA @ h)
    cov = (hbar / 2.0) * sp @ sp.T
    mean = rng.normal(scale=1.0, size=4)
    return GaussianState(modes=(2, 3), mean=mean, cov=cov, hbar=hbar)


def random_measurement(rng, psi: MinUncertaintyParams):
    """Random solvable generator wired to a random (untuned) pure probe."""
    gen = random_solvable_generator(rng)
    return measurement_from_parts(gen, random_pure_probe(rng, psi.hbar))


def random_matched_measurement(rng, psi: MinUncertaintyParams):
    """Random model built to satisfy the achievability conditions.

    Draws (tau, gamma2, E, nu), solves the coupling equations, and tunes
    the probe to kappa = a22.  Returns (measurement, nu).
    """
    while True:
        gamma2 = rng.uniform(-1.0, 1.0)
        e = rng.uniform(-1.5, 1.5)
        tau = rng.uniform(0.3, 1.5)
        nu = rng.uniform(0.1, 0.9)
        try:
            alpha1, alpha3 = solve_couplings(nu, tau, gamma2, e)
        except ValueError:
            continue
        gen = SolvableGenerator.from_couplings(alpha1, alpha3, gamma2, e, tau)
        a22 = propagate(gen).a[1, 1]
        if abs(a22) < 0.05:
            continue
        probe = make_probe_state(nu, a22, psi)
        return measurement_from_parts(gen, probe), nu


def frozen_transform_a(family: ModelFamily, nu: float) -> np.ndarray:
    """Frozen closed form of e^{tau S} for the named families."""
    n = nu
    if family is ModelFamily.X:
        return np.array(
            [
                [-1.0, -4.0 / n, 0.0],
                [n, 2.0, -n * (1 - n) / 4.0],
                [0.0, -4.0 / (n * (1 - n)), 0.0],
            ]
        )
    if family is ModelFamily.Y2:
        return np.array(
            [
                [-1.0, -8.0 / n, 0.0],
                [n, 4.0, -n * (1 - n) / 8.0],
                [0.0, -8.0 / (n * (1 - n)), 0.0],
            ]
        )
    if family is ModelFamily.Y0:
        return np.array(
            [
                [1.0, 0.0, -(1 - n)],
                [n, 1.0, -n * (1 - n) / 2.0],
                [0.0, 0.0, 1.0],
            ]
        )
    if family is ModelFamily.Z:
        return np.array(
            [
                [1.0, 0.0, -(1 - n) / 2.0],
                [n, 2.0, -n * (1 - n) / 4.0],
                [0.0, 0.0, 0.5],
            ]
        )
    raise ValueError(family)


def frozen_transform_b(family: ModelFamily, nu: float) -> np.ndarray:
    """Frozen closed form of e^{-tau S^T} for the named families.

    The (1,3) entry of the X family is -4/(1-nu), the unique value
    compatible with A B^T = I (cross-checked against both exponential
    routes).
    """
    n = nu
    if family is ModelFamily.X:
        return np.array(
            [
                [-1.0, 0.0, -4.0 / (1 - n)],
                [0.0, 0.0, -4.0 / (n * (1 - n))],
                [1 - n, -n * (1 - n) / 4.0, 2.0],
            ]
        )
    if family is ModelFamily.Y2:
        return np.array(
            [
                [-1.0, 0.0, -8.0 / (1 - n)],
                [0.0, 0.0, -8.0 / (n * (1 - n))],
                [1 - n, -n * (1 - n) / 8.0, 4.0],
            ]
        )
    if family is ModelFamily.Y0:
        return np.array(
            [
                [1.0, -n, 0.0],
                [0.0, 1.0, 0.0],
                [1 - n, -n * (1 - n) / 2.0, 1.0],
            ]
        )
    if family is ModelFamily.Z:
        return np.array(
            [
                [1.0, -n / 2.0, 0.0],
                [0.0, 0.5, 0.0],
                [1 - n, -n * (1 - n) / 4.0, 2.0],
            ]
        )
    raise ValueError(family)


def frozen_generator(family: ModelFamily, nu: float) -> np.ndarray:
    """Frozen generator matrices S of the four families."""
    n = nu
    if family is ModelFamily.X:
        return np.array(
            [
                [0.0, -2.0 / n, -(1 - n) / 2.0],
                [n / 2.0, 1.0, 0.0],
                [2.0 / (1 - n), 0.0, -1.0],
            ]
        )
    if family is ModelFamily.Y2:
        return np.array(
            [
                [0.0, -4.0 / n, -(1 - n) / 2.0],
                [n / 2.0, 2.0, 0.0],
                [4.0 / (1 - n), 0.0, -2.0],
            ]
        )
    if family is ModelFamily.Y0:
        return np.array(
            [
                [0.0, 0.0, -(1 - n)],
                [n, 0.0, 0.0],
                [0.0, 0.0, 0.0],
            ]
        )
    if family is ModelFamily.Z:
        return np.array(
            [
                [0.0, 0.0, n - 1.0],
                [n, 1.0, 0.0],
                [0.0, 0.0, -1.0],
            ]
        )
    raise ValueError(family)


def nu_grid_99():
    return [0.01 * k for k in range(1, 100)]
