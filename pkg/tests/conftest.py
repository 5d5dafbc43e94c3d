"""
Shared fixtures
"""
import numpy as np
import pytest

from fracbvp.constants import PRESETS
from fracbvp.kernel import cone_constants
from fracbvp.model import ProblemParams, StieltjesFunctional, validate_regime


@pytest.fixture(name="example_params")
def fixture_example_params():
    """alpha = 3/2, beta = 4/5, eta = 3/4."""
    return ProblemParams(**PRESETS["example"]["problem"])


@pytest.fixture(name="example_functional")
def fixture_example_functional():
    """Single atom of weight 1/2 at xi = 1/4, no constant term."""
    return StieltjesFunctional(**PRESETS["example"]["functional"])


@pytest.fixture(name="example_constants")
def fixture_example_constants(example_params, example_functional):
    """Cone constants of the worked example."""
    return cone_constants(example_params, example_functional)


@pytest.fixture(name="thermostat_params")
def fixture_thermostat_params():
    """alpha = 2, beta = 1, eta = 1/2."""
    return ProblemParams(**PRESETS["thermostat"]["problem"])


@pytest.fixture(name="rng")
def fixture_rng():
    """Seeded generator so property checks are reproducible."""
    return np.random.default_rng(20190315)


@pytest.fixture(name="regime_params")
def fixture_regime_params(rng):
    """Factory of random parameter triples inside the positivity regime."""
    def _draw(count):
        params = []
        while len(params) < count:
            candidate = ProblemParams(
                alpha=rng.uniform(1.05, 2.0),
                beta=rng.uniform(0.05, 3.0),
                eta=rng.uniform(0.0, 1.0))
            regime = validate_regime(candidate)
            if regime.holds and regime.inv_M_positive:
                params.append(candidate)
        return params
    return _draw
