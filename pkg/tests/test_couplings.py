import numpy as np
import pytest

from rydchain.couplings import (HOP_PS, HOP_PSP, HOP_SSP, CouplingConstants, field_tuned_table,
                                hop_element, natural_time_unit, omega2, omega3, omega4,
                                unit_constants)
from rydchain.errors import ConfigurationError, DomainError
from rydchain.units import BOHR_PER_UM


def test_omega2():
    assert omega2(1.0, unit_constants()) == 1.0
    c = unit_constants(mu=2.0, nu=3.0, alpha=0.5)
    assert omega2(2.0, c) == pytest.approx(0.375)
    with pytest.raises(DomainError):
        omega2(0.0, c)


def test_hop_elements():
    c = unit_constants()
    assert hop_element("p<->s", 1.0, c) == 1.0
    assert hop_element(HOP_SSP, 2.0, unit_constants(gamma_c=2.0)) == pytest.approx(0.5)
    off = c.without_hopping()
    for kind in (HOP_PS, HOP_PSP, HOP_SSP):
        assert hop_element(kind, 1.0, off) == 0.0
    with pytest.raises(DomainError):
        hop_element("p-q", 1.0, c)


def test_omega3_chain():
    x = np.array([0.0, 1.0, 2.0])
    assert omega3(0, 1, 2, x, unit_constants()) == pytest.approx(1.125)
    with pytest.raises(DomainError):
        omega3(0, 0, 2, x, unit_constants())


def test_omega4_examples():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    assert round(omega4(0, 1, 2, 3, x, unit_constants()), 5) == 1.19792
    with pytest.raises(DomainError):
        omega4(0, 1, 1, 3, x, unit_constants())


def test_omega4_scales_with_unit_bracket():
    # every pair distance equal to 1 is not collinear; with all inverse cubes
    # set to 1 each of the three bracket terms is 2, so the element is 6 * prefactor
    x = np.array([0.0, 1.0, 2.0, 3.0])
    c = unit_constants(mu=2.0)
    assert omega4(0, 1, 2, 3, x, c) == pytest.approx(8 * omega4(0, 1, 2, 3, x, unit_constants()))
    ones = np.ones((4, 4))
    terms = [ones[m, 3] * ones[a, b] * (ones[m, a] + ones[m, b])
             for m, a, b in ((0, 1, 2), (1, 0, 2), (2, 0, 1))]
    assert sum(terms) == 6


def test_natural_time_unit():
    c = unit_constants()
    assert natural_time_unit(2, 1.0 / BOHR_PER_UM, c) == pytest.approx(1.0)
    assert natural_time_unit(3, 1.0 / BOHR_PER_UM, c) == pytest.approx(1 / 1.125)
    with pytest.raises(ConfigurationError):
        natural_time_unit(5, 1.0, c)


def test_default_delta_anchor():
    # nearest-neighbour three-body element at 11 um equals the two-body one at 50 um
    c = CouplingConstants()
    t3 = natural_time_unit(3, 11.0, c)
    t2 = natural_time_unit(2, 50.0, c)
    assert t3 == pytest.approx(t2, rel=1e-12)


def test_constants_validation():
    with pytest.raises(ConfigurationError):
        CouplingConstants(alpha=0.0)
    with pytest.raises(ConfigurationError):
        CouplingConstants(mu=-1.0)


@pytest.mark.parametrize("order", [2, 3, 4])
def test_field_table_counts(order):
    from math import comb
    x = np.arange(6, dtype=float)
    groups, s_sites, values = field_tuned_table(order, x, unit_constants())
    assert len(values) == comb(6, order) * order
    assert np.all(values > 0)
    for g, s in zip(groups, s_sites):
        assert s in g


@pytest.mark.parametrize("order,power", [(2, 3), (3, 6), (4, 9)])
def test_dilation_scaling(order, power):
    x = np.array([0.0, 1.3, 2.1, 3.7, 5.2])
    lam = 1.7
    _, _, v = field_tuned_table(order, x, unit_constants())
    _, _, v2 = field_tuned_table(order, lam * x, unit_constants())
    np.testing.assert_allclose(v2, v * lam ** -power, rtol=1e-13)
