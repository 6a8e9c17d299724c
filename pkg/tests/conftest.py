from __future__ import annotations

import numpy as np
import pytest

from linbreak.model import DeterministicPlan, ModelSpec, NoiseModel, PiecewiseCoefficients


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


def constant_step_spec(N: int = 100, a: float = 1.0, b: float = 2.0, theta: float = 0.5,
                       std: float = 0.0) -> ModelSpec:
    """Scalar mean-shift model ``y = c`` with ``c: a -> b`` at ``theta``."""
    coeffs = PiecewiseCoefficients.single_change([[a]], [[b]], theta)
    return ModelSpec(DeterministicPlan(("1 + 0*t",)), coeffs, NoiseModel.iid(std), N)
