import numpy as np
import pytest

from gpw.smoothfn import parse

# Profiles with f'' nonzero, plus the flat one; keys are the text form.
FLEET = {
    "flat": "poly:0",
    "square": "poly:0,0,1",
    "exp": "exp:1@1",
    "quartic": "poly:0,0,0,0,1",
    "expsum": "exp:1@1+1@2",
}
CURVED = ["square", "exp", "quartic", "expsum"]


@pytest.fixture(params=list(FLEET))
def fleet_f(request):
    return parse(FLEET[request.param])


@pytest.fixture(params=CURVED)
def curved_f(request):
    return parse(FLEET[request.param])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
