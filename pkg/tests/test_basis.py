import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rydchain.basis import (P, S, SP, enumerate_sector, format_state, pack, parse_state,
                            saturation_fraction, sector_dimension, sector_violation,
                            unrank_combinatorial)
from rydchain.errors import ConfigurationError, DomainError, MembershipError, ResourceError


def brute_force(n, order):
    """All 3**n strings filtered by n_s' = (order - 1) n_s, canonically sorted."""
    keep = [c for c in itertools.product((P, S, SP), repeat=n)
            if c.count(SP) == (order - 1) * c.count(S)]
    return sorted(keep, key=lambda c: (c.count(S), c))


@pytest.mark.parametrize("n,order,dim", [(12, 2, 73789), (13, 3, 93094), (14, 4, 108109),
                                         (3, 3, 4), (2, 2, 3), (1, 4, 1)])
def test_sector_dimension(n, order, dim):
    assert sector_dimension(n, order) == dim


@pytest.mark.parametrize("order", [2, 3, 4])
@pytest.mark.parametrize("n", range(1, 7))
def test_enumeration_matches_brute_force(n, order):
    basis = enumerate_sector(n, order)
    expected = brute_force(n, order)
    assert basis.dim == len(expected) == sector_dimension(n, order)
    assert [tuple(s) for s in basis.states.tolist()] == expected


def test_small_sector_listings():
    assert [format_state(s) for s in enumerate_sector(2, 2).states] == ["pp", "ss'", "s's"]
    assert [format_state(s) for s in enumerate_sector(1, 3).states] == ["p"]
    four = [format_state(s) for s in enumerate_sector(4, 4).states]
    assert four == ["pppp", "ss's's'", "s'ss's'", "s's'ss'", "s's's's"]


def test_rank_round_trip_8_2():
    basis = enumerate_sector(8, 2)
    assert basis.dim == 1107
    for i in range(basis.dim):
        state = basis.unrank(i)
        assert basis.rank(state) == i
        assert unrank_combinatorial(i, 8, 2) == state
    assert basis.rank("p" * 8) == 0
    assert basis.unrank(0) == (P,) * 8


def test_lookup_vectorised_and_missing():
    basis = enumerate_sector(5, 3)
    np.testing.assert_array_equal(basis.lookup(basis.keys), np.arange(basis.dim))
    outside = pack(np.array([[S, S, P, P, P]], dtype=np.uint8))
    assert basis.lookup(outside)[0] == -1


def test_membership_error_names_conservation_law():
    basis = enumerate_sector(4, 3)
    with pytest.raises(MembershipError, match="n_s' = 2\\*n_s"):
        basis.rank("sspp")
    assert sector_violation(parse_state("ss'pp"), 2) is None
    assert sector_violation(parse_state("ss'pp"), 3) is not None


def test_parse_format_round_trip():
    for text in ["p", "ss'p", "s'ss's'p"]:
        assert format_state(parse_state(text)) == text
    with pytest.raises(DomainError):
        parse_state("pxq")


def test_invalid_order_and_budget():
    with pytest.raises(ConfigurationError):
        sector_dimension(4, 5)
    with pytest.raises(ResourceError, match="dimension"):
        enumerate_sector(12, 2, memory_budget=1000)


@pytest.mark.parametrize("n,order,value", [(12, 2, 0.326), (13, 3, 0.213), (14, 4, 0.153)])
def test_saturation_fraction_reference_values(n, order, value):
    assert round(saturation_fraction(n, order), 3) == value


def test_saturation_two_atoms():
    assert saturation_fraction(2, 2) == pytest.approx(1 / 3)


@pytest.mark.parametrize("order", [2, 3, 4])
@pytest.mark.parametrize("n", range(1, 9))
def test_saturation_matches_enumeration(n, order):
    basis = enumerate_sector(n, order)
    assert saturation_fraction(n, order) == pytest.approx(basis.n_s.mean() / n, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 9), order=st.sampled_from([2, 3, 4]), data=st.data())
def test_rank_unrank_property(n, order, data):
    dim = sector_dimension(n, order)
    i = data.draw(st.integers(0, dim - 1))
    state = unrank_combinatorial(i, n, order)
    assert sector_violation(state, order) is None
    assert enumerate_sector(n, order).rank(state) == i


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 14), order=st.sampled_from([2, 3, 4]))
def test_dimension_is_multinomial_sum(n, order):
    total = sum(math.factorial(n) // (math.factorial(k) * math.factorial((order - 1) * k)
                                     * math.factorial(n - order * k))
                for k in range(n // order + 1))
    assert sector_dimension(n, order) == total


def test_basis_text_dump():
    text = enumerate_sector(3, 3).to_text()
    assert text.splitlines() == ["3 3 4", "ppp", "ss's'", "s'ss'", "s's's"]
