import math

import numpy as np
import pytest

from torusbreak.diophantine import preset
from torusbreak.frames import complete_frame, pushforward
from torusbreak.perturbation import (PerturbationParams, plan_parameters,
                                     build_with_escalation, build_v_factors)


@pytest.fixture(scope="session")
def golden_omega():
    return preset("golden")


@pytest.fixture(scope="session")
def golden_frame():
    return complete_frame((-3, 5), (5, 3))


@pytest.fixture(scope="session")
def golden_push(golden_frame, golden_omega):
    return pushforward(golden_frame, golden_omega, tau=0.0)


@pytest.fixture(scope="session")
def golden_params(golden_push, golden_frame):
    return plan_parameters(2, 0.0, 0.1, 1e-3, golden_push.omega_new,
                           golden_frame.k_norm)


@pytest.fixture(scope="session")
def golden_spec(golden_params, golden_frame):
    """The flagship build: planned degree law, quality-gate escalation."""
    _, spec = build_with_escalation(golden_params, golden_frame)
    return spec


def make_fat_params(M=32, kappa=4, R=0.8, k_norm=math.sqrt(34.0)):
    """Directly constructed parameters with a wide, easily resolved bump.

    Used by unit tests that exercise the v-construction contracts
    without the degree escalation of the physical parameter laws.
    """
    d, tau, eps = 2, 0.0, 0.1
    return PerturbationParams(
        d=d, tau=tau, eps_exp=eps, eps_size=1e-3, alpha=2.0,
        a=2 * d + 2 * tau - 2 - eps, s0=2 * d + 2 * tau,
        kappa=kappa, kappa_capped=False, k_norm=k_norm,
        omega1=0.09, R_n=R, M=M, M_planned=M, mu_target=0.09 ** 2)


@pytest.fixture(scope="session")
def fat_params():
    return make_fat_params()


@pytest.fixture(scope="session")
def fat_factors(fat_params):
    return build_v_factors(fat_params)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)
