import pytest
from hypothesis import given
from hypothesis import strategies as st

from carbon_ledger.emissions import Co2Estimate
from carbon_ledger.equivalency import EquivalencyFactors, co2_to_cars, co2_to_homes
from carbon_ledger.errors import ValidationError

# Independently typed ratios: tonnes / cars and tonnes / homes per table row.
CAR_RATIOS = (326.6 / 70.6, 181.7 / 39.8, 65.1 / 14.1)
HOME_RATIOS = (326.6 / 55.3, 181.7 / 30.8, 65.1 / 11.0)


def t(tonnes):
    return Co2Estimate(tonnes * 1000.0)


def test_default_factors_are_row_means():
    f = EquivalencyFactors()
    assert f.tonnes_per_car_year == pytest.approx(sum(CAR_RATIOS) / 3, rel=1e-12)
    assert f.tonnes_per_home_year == pytest.approx(sum(HOME_RATIOS) / 3, rel=1e-12)
    assert f.tonnes_per_home_year == pytest.approx(5.91, abs=0.01)
    assert f.tonnes_per_car_year == pytest.approx(4.60, abs=0.01)


def test_row_ratios_agree_within_two_percent():
    for ratios in (CAR_RATIOS, HOME_RATIOS):
        assert max(ratios) / min(ratios) - 1 < 0.02


@pytest.mark.parametrize(
    "tonnes, cars, tol",
    [(326.6, 70.6, 0.01), (181.7, 39.8, 0.02), (65.1, 14.1, 0.03), (0.0, 0.0, 0.0)],
)
def test_cars(tonnes, cars, tol):
    assert co2_to_cars(t(tonnes)) == pytest.approx(cars, rel=tol, abs=1e-12)


@pytest.mark.parametrize(
    "tonnes, homes, tol",
    [(326.6, 55.3, 0.01), (181.7, 30.8, 0.03), (65.1, 11.0, 0.03), (0.0, 0.0, 0.0)],
)
def test_homes(tonnes, homes, tol):
    assert co2_to_homes(t(tonnes)) == pytest.approx(homes, rel=tol, abs=1e-12)


@given(kg=st.floats(min_value=0, max_value=1e12))
def test_inverse_consistency(kg):
    f = EquivalencyFactors()
    assert co2_to_cars(Co2Estimate(kg), f) * f.tonnes_per_car_year * 1000 == pytest.approx(kg, rel=1e-12)
    assert co2_to_homes(Co2Estimate(kg), f) * f.tonnes_per_home_year * 1000 == pytest.approx(kg, rel=1e-12)


@given(a=st.floats(min_value=0, max_value=1e9), b=st.floats(min_value=0, max_value=1e9))
def test_monotone(a, b):
    lo, hi = sorted((a, b))
    assert co2_to_cars(Co2Estimate(lo)) <= co2_to_cars(Co2Estimate(hi))
    assert co2_to_homes(Co2Estimate(lo)) <= co2_to_homes(Co2Estimate(hi))


def test_factors_must_be_positive():
    with pytest.raises(ValidationError):
        EquivalencyFactors(tonnes_per_car_year=0.0)
    with pytest.raises(ValidationError):
        EquivalencyFactors(tonnes_per_home_year=-1.0)


def test_custom_factors():
    f = EquivalencyFactors(4.6, 7.5)
    assert co2_to_cars(t(46.0), f) == pytest.approx(10.0)
    assert co2_to_homes(t(15.0), f) == pytest.approx(2.0)
