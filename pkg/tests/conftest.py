import math

import pytest
from hypothesis import HealthCheck, settings

from lpp_tails.core import ModelParams
from lpp_tails.endpoint import solve_endpoint
from lpp_tails.gfunction import make_context

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

REF_T, REF_GAMMA, REF_A = 1 / math.sqrt(2), 2.0, 4.0


@pytest.fixture(scope="session")
def ref_params():
    return ModelParams(REF_T, REF_GAMMA)


@pytest.fixture(scope="session")
def ref_endpoint(ref_params):
    return solve_endpoint(REF_A, ref_params)


@pytest.fixture(scope="session")
def ref_ctx(ref_endpoint):
    return make_context(ref_endpoint)


@pytest.fixture(scope="session")
def ref_contours(ref_ctx):
    return ref_ctx.contours
