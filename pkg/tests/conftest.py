import pytest

from qscatter.core import RateSet, mhz_to_angular


@pytest.fixture
def fig5_rates():
    # low-rate Emitter driving a fast Probe
    return RateSet.from_mhz(0.09, 1.0)


@pytest.fixture
def device_rates():
    return RateSet.from_mhz(1.86, 1.85)


@pytest.fixture
def fig5_omega():
    return mhz_to_angular(0.3)
