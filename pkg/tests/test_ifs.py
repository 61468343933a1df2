from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normality_lab import (
    AffineMap,
    attractor_hull,
    cantor_system,
    compose,
    make_system,
    normalize,
    validate,
)
from normality_lab.errors import (
    ConfigParseError,
    DegenerateFixedPoints,
    HullNotInvariant,
    NonContractingMap,
    SymbolOutOfRange,
    WeightSumError,
)
from normality_lab.ifs import as_fraction, frac_str, system_from_dict, system_to_dict

from oracles import iterated_hull

F = Fraction


class TestValidate:
    def test_cantor_valid(self, cantor):
        assert validate(cantor).ok

    def test_weight_sum_error(self):
        bad = make_system([("1/3", "0"), ("1/3", "2/3")], ["1/2", "1/3"],
                          hull=("0", "1"), check=False)
        rep = validate(bad)
        assert not rep.ok
        assert any(isinstance(f, WeightSumError) for f in rep.failures)

    def test_non_contracting(self):
        bad = make_system([("3/2", "0"), ("1/3", "2/3")], ["1/2", "1/2"],
                          hull=("0", "1"), check=False)
        rep = validate(bad)
        assert any(isinstance(f, NonContractingMap) for f in rep.failures)

    def test_hull_not_invariant(self):
        bad = make_system([("1/3", "0"), ("1/3", "2/3")], ["1/2", "1/2"],
                          hull=("0", "1/2"), check=False)
        rep = validate(bad)
        assert any(isinstance(f, HullNotInvariant) for f in rep.failures)

    def test_degenerate_fixed_points(self):
        bad = make_system([("1/3", "0"), ("1/2", "0")], ["1/2", "1/2"],
                          hull=("0", "0"), check=False)
        rep = validate(bad)
        assert any(isinstance(f, DegenerateFixedPoints) for f in rep.failures)

    def test_zero_weight_rejected(self):
        with pytest.raises(WeightSumError):
            make_system([("1/3", "0"), ("1/3", "2/3")], ["1", "0"])


class TestCompose:
    def test_empty_word_is_identity(self, cantor):
        m = compose(cantor, ())
        assert m.slope == 1 and m.offset == 0

    def test_cantor_12(self, cantor):
        m = compose(cantor, (1, 2))
        assert (m.slope, m.offset) == (F(1, 9), F(2, 9))

    def test_cantor_21(self, cantor):
        m = compose(cantor, (2, 1))
        assert (m.slope, m.offset) == (F(1, 9), F(2, 3))

    def test_symbol_out_of_range(self, cantor):
        with pytest.raises(SymbolOutOfRange):
            compose(cantor, (1, 3))

    @given(w1=st.lists(st.integers(1, 2), max_size=8),
           w2=st.lists(st.integers(1, 2), max_size=8))
    @settings(max_examples=60, deadline=None)
    def test_concatenation_homomorphism(self, w1, w2):
        system = cantor_system()
        lhs = compose(system, tuple(w1) + tuple(w2))
        rhs = compose(system, w1).after(compose(system, w2))
        assert lhs == rhs

    @given(word=st.lists(st.integers(1, 2), min_size=1, max_size=20))
    @settings(max_examples=40, deadline=None)
    def test_slope_product_and_monotonicity(self, word):
        system = make_system([("1/2", "0"), ("-1/4", "3/4")], ["1/2", "1/2"],
                             hull=("-1", "1"), check=False)
        prod = F(1)
        for s in word:
            prod *= abs(system.maps[s - 1].slope)
        m = compose(system, word)
        assert abs(m.slope) == prod
        shorter = compose(system, word[:-1])
        assert abs(m.slope) < abs(shorter.slope)


class TestAttractorHull:
    @pytest.mark.parametrize("maps,expected", [
        ([("1/3", "0"), ("1/3", "2/3")], (F(0), F(1))),
        ([("1/2", "0"), ("1/2", "1/2")], (F(0), F(1))),
        ([("2/5", "0"), ("2/5", "2/5")], (F(0), F(2, 3))),
    ])
    def test_known_hulls(self, maps, expected):
        amaps = [AffineMap(as_fraction(s), as_fraction(t)) for s, t in maps]
        assert attractor_hull(amaps) == expected

    def test_negative_slopes(self):
        maps = [AffineMap(F(-1, 2), F(0)), AffineMap(F(-1, 2), F(1, 2))]
        lo, hi = attractor_hull(maps)
        # endpoints solve a = f1(b), b = f2(a)
        assert (lo, hi) == (F(-1, 3), F(2, 3))
        it_lo, it_hi = iterated_hull(maps)
        assert lo <= it_lo and it_hi <= hi
        assert abs(it_lo - lo) < F(1, 10**30) and abs(it_hi - hi) < F(1, 10**30)

    def test_invariance_exact(self, three_systems):
        for system in three_systems.values():
            lo, hi = system.hull
            for m in system.maps:
                a, b = m.image(lo, hi)
                assert lo <= a and b <= hi

    def test_non_contracting_rejected(self):
        with pytest.raises(NonContractingMap):
            attractor_hull([AffineMap(F(1), F(0)), AffineMap(F(1, 2), F(1))])


class TestNormalize:
    def test_identity_on_unit_hull(self, cantor):
        norm, g = normalize(cantor)
        assert g.slope == 1 and g.offset == 0
        assert norm is cantor

    def test_shifted_cantor(self):
        shifted = make_system([("1/3", "1"), ("1/3", "5/3")])
        assert shifted.hull == (F(3, 2), F(5, 2))
        norm, g = normalize(shifted)
        assert (g.slope, g.offset) == (F(1), F(3, 2))
        assert [(m.slope, m.offset) for m in norm.maps] == \
            [(F(1, 3), F(0)), (F(1, 3), F(2, 3))]

    def test_scaled_pair(self, beta_52):
        norm, g = normalize(beta_52)
        assert (g.slope, g.offset) == (F(2, 3), F(0))
        assert norm.hull == (F(0), F(1))

    def test_idempotent_and_preserving(self, three_systems):
        for system in three_systems.values():
            norm, _ = normalize(system)
            again, g2 = normalize(norm)
            assert g2.slope == 1 and g2.offset == 0
            assert again.weights == system.weights
            assert sorted(m.slope for m in again.maps) == \
                sorted(m.slope for m in system.maps)


class TestSerialization:
    def test_round_trip_bit_exact(self, three_systems):
        for system in three_systems.values():
            data = system_to_dict(system)
            back = system_from_dict(data)
            assert back == system

    @given(num=st.integers(-10**12, 10**12),
           den=st.integers(1, 10**12))
    @settings(max_examples=80, deadline=None)
    def test_fraction_codec(self, num, den):
        x = F(num, den)
        assert as_fraction(frac_str(x)) == x

    def test_bad_rational_rejected(self):
        with pytest.raises(ConfigParseError):
            as_fraction("1/0")
        with pytest.raises(ConfigParseError):
            as_fraction(0.5)

    def test_missing_fields_rejected(self):
        with pytest.raises(ConfigParseError):
            system_from_dict({"weights": ["1"]})
