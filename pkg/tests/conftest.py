import pytest

from spheretx import ChannelSpec


def make_spec(dimension="3D", d=2e-6, r_tx=1e-6, r_rx=1e-6, diffusion=1e-9, molecules=1000):
    return ChannelSpec(dimension, r_tx, r_rx, d, diffusion, molecules)


@pytest.fixture
def spec3():
    return make_spec("3D")


@pytest.fixture
def spec1():
    return make_spec("1D")
