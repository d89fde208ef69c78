import numpy as np
import pytest

from atomchip.constants import GAUSS
from atomchip.fields import BiotSavartModel
from atomchip.geometry import (
    ChipLayout, CurrentConfig, WireSegmentPath, builtin_paper_layout, rb87_f2m2,
)


@pytest.fixture(scope="session")
def species():
    return rb87_f2m2()


@pytest.fixture(scope="session")
def thin_wire():
    """Long straight wire with its centerline in the chip plane (y = 0)."""
    return WireSegmentPath(
        name="w", channel="w",
        nodes=((0.0, 0.0, -0.05), (0.0, 0.0, 0.05)),
        width=1e-6, thickness=1e-6,
    )


@pytest.fixture(scope="session")
def thin_model(thin_wire):
    return BiotSavartModel(ChipLayout(wires=(thin_wire,)), 1, 1)


@pytest.fixture(scope="session")
def thin_currents():
    return CurrentConfig(dc={"w": 2.0}, bias=(24.8 * GAUSS, 0.0, 0.0))


@pytest.fixture(scope="session")
def paper():
    layout, currents, sp = builtin_paper_layout()
    return layout, currents, sp


@pytest.fixture(scope="session")
def paper_model(paper):
    layout, _, _ = paper
    return BiotSavartModel(layout)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
