import math

import numpy as np
import pytest

from vanetsim import radio as rd
from vanetsim.radio import NakagamiSchedule, RadioParams

RP = RadioParams()
GOLD_FRIIS_100 = 1.634209370967266e-10
GOLD_RATIO_DB_100 = 87.86692303476354


def test_friis_golden_and_db():
    assert rd.friis_rx_power(100.0, RP) == pytest.approx(GOLD_FRIIS_100, rel=1e-12)
    assert rd.power_ratio_db(100.0, RP) == pytest.approx(GOLD_RATIO_DB_100, abs=1e-9)
    # free-space loss in dB below 20 dBm, computed independently
    fspl = 20 * math.log10(4 * math.pi * 100.0 / RP.wavelength)
    assert 10 * math.log10(rd.friis_rx_power(100.0, RP) / 1e-3) == pytest.approx(20.0 - fspl, abs=1e-9)


def test_friis_near_field_rejected():
    with pytest.raises(rd.RadioDomainError):
        rd.friis_rx_power(0.5, RP)


def test_friis_decreasing_and_square_law():
    ds = np.linspace(1.0, 1000.0, 200)
    p = [rd.friis_rx_power(d, RP) for d in ds]
    assert all(a > b for a, b in zip(p, p[1:]))
    for d in (1.0, 3.7, 20.0, 150.0):
        diff = rd.power_ratio_db(10 * d, RP) - rd.power_ratio_db(d, RP)
        assert diff == pytest.approx(20.0, abs=1e-12)


def test_power_ratio_zero_db():
    rp = RadioParams(wavelength=4 * math.pi)  # link gain 1 at d = 1
    assert rd.power_ratio_db(1.0, rp) == pytest.approx(0.0, abs=1e-12)


def test_max_and_attenuated_power():
    assert rd.max_received_power(1.0, RP) == pytest.approx(GOLD_FRIIS_100 * 1e4, rel=1e-12)
    assert rd.attenuated_power(100.0, RP) == rd.max_received_power(100.0, RP)
    assert rd.attenuated_power(100.0, RadioParams(alpha=0.0)) == 0.0
    assert rd.attenuated_power(100.0, RadioParams(alpha=0.5)) == pytest.approx(GOLD_FRIIS_100 / 2, rel=1e-12)


def test_params_validation():
    with pytest.raises(rd.RadioDomainError):
        RadioParams(alpha=1.5)
    with pytest.raises(rd.RadioDomainError):
        RadioParams(p_tx=0.0)
    with pytest.raises(rd.RadioDomainError):
        RadioParams(d_min=300.0)
    assert RP.rx_threshold == pytest.approx(rd.friis_rx_power(200.0, RP))


def test_path_loss_examples():
    rp = RadioParams(pl_fs_d0=40.0)
    assert rd.path_loss_db(1.0, rp) == 80.0
    assert rd.path_loss_db(10.0, rp) == pytest.approx(100.0)
    assert rd.path_loss_db(100.0, rp) == pytest.approx(120.0)
    assert rd.path_loss_db(100.0, rp, literal=False) == pytest.approx(80.0)
    assert rd.invert_path_loss(120.0, rp) == pytest.approx(100.0)
    with pytest.raises(rd.RadioDomainError):
        rd.path_loss_db(0.5, rp)
    with pytest.raises(rd.RadioDomainError):
        rd.invert_path_loss(79.0, rp)


@pytest.mark.parametrize("literal", [True, False])
def test_path_loss_round_trip(literal):
    rng = np.random.default_rng(3)
    for d in rng.uniform(1.0, 5000.0, 1000):
        back = rd.invert_path_loss(rd.path_loss_db(d, RP, literal), RP, literal)
        assert abs(back - d) <= 1e-9 * d


def test_schedule_bands():
    s = NakagamiSchedule()
    assert [s.shape_at(d) for d in (10.0, 79.9, 80.0, 199.0, 200.0, 500.0)] == [3, 3, 1.5, 1.5, 1, 1]
    assert list(s.shape_at(np.array([10.0, 80.0, 250.0]))) == [3, 1.5, 1]
    with pytest.raises(rd.RadioDomainError):
        NakagamiSchedule((1.0,), (1.0,))
    with pytest.raises(rd.RadioDomainError):
        NakagamiSchedule((), (0.2,))


def test_nakagami_mean_and_limits():
    rng = np.random.default_rng(11)
    sched = NakagamiSchedule()
    for d in (50.0, 150.0, 300.0):
        draws = rd.nakagami_sample(np.full(100_000, 2e-9), np.full(100_000, d), sched, rng)
        assert draws.mean() == pytest.approx(2e-9, rel=0.02)
    assert rd.nakagami_sample(0.0, 10.0, sched, rng) == 0.0
    stiff = NakagamiSchedule((), (500.0,))
    draws = rd.nakagami_sample(np.ones(20_000), np.ones(20_000), stiff, rng)
    assert draws.std() < 0.07
    with pytest.raises(rd.RadioDomainError):
        rd.nakagami_sample(-1.0, 10.0, sched, rng)


def test_nakagami_deterministic_under_seed():
    a = rd.nakagami_sample(np.ones(5), np.full(5, 100.0), NakagamiSchedule(), np.random.default_rng(4))
    b = rd.nakagami_sample(np.ones(5), np.full(5, 100.0), NakagamiSchedule(), np.random.default_rng(4))
    assert np.array_equal(a, b)
