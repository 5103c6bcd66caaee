from __future__ import annotations

import numpy as np
import pytest

from forbcfg.choice_engine import Choice, choice_from_tcm
from forbcfg.config import Settings
from forbcfg.tcm_opt import Tcm


@pytest.fixture(name="rng")
def rng_() -> np.random.Generator:
    return np.random.default_rng(20240817)


@pytest.fixture(name="settings")
def settings_() -> Settings:
    return Settings()


@pytest.fixture(name="example_tcm")
def example_tcm_() -> Tcm:
    """Five vertices, extremal at α = 2: m₁₂ = 3, m₁₃ = m₂₃ = 2, m₄₅ = 3."""
    edges = {
        (1, 2, 3): (1, 2),
        (1, 2, 4): (1, 2),
        (1, 2, 5): (1, 2),
        (1, 3, 4): (1, 3),
        (1, 3, 5): (1, 3),
        (2, 3, 4): (2, 3),
        (2, 3, 5): (2, 3),
        (1, 4, 5): (4, 5),
        (2, 4, 5): (4, 5),
        (3, 4, 5): (4, 5),
    }
    return Tcm.from_mapping(5, edges)


@pytest.fixture(name="example_choice")
def example_choice_(example_tcm: Tcm) -> Choice:
    return choice_from_tcm(example_tcm)


@pytest.fixture(name="a1_choice")
def a1_choice_() -> Choice:
    """One triple carrying A₁ (selector 1)."""
    return Choice(m=3, selectors=(1,))


@pytest.fixture(name="identity_choice")
def identity_choice_() -> Choice:
    return Choice(m=3, selectors=(0,))
