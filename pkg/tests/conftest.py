from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from maskstack import LabelConfig, add_label

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260814)


@pytest.fixture
def four_label_cfg() -> LabelConfig:
    cfg = LabelConfig()
    cfg = add_label(cfg, "crescent", (0, 255, 0))
    cfg = add_label(cfg, "spindle", (211, 179, 145))
    cfg = add_label(cfg, "lattice", (23, 54, 255))
    cfg = add_label(cfg, "bloom", (255, 8, 8))
    return cfg
