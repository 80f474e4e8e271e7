import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from gridcert._validation import DimensionError
from gridcert.certificates import (
    CertificateVerdict,
    certify_all,
    certify_base,
    certify_hull,
    certify_rescaled,
    criterion_lhs,
    hull_ratio,
    lambda_grid,
    nuclear_norm_2,
    nuclear_norm_inf,
    rhombus,
)
from helpers import FIXTURE_Z, FIXTURE_Z_EXACT, random_radial_network

# |Z_22|^2 of the 3-bus fixture, from its exact rational parts
Z22_SQ = float(FIXTURE_Z_EXACT[(1, 1)][0] ** 2 + FIXTURE_Z_EXACT[(1, 1)][1] ** 2)
ROW2_NORM = math.sqrt(1 / 49 + Z22_SQ)


class TestNorms:
    @pytest.mark.parametrize("fn", [nuclear_norm_2, nuclear_norm_inf])
    def test_identity(self, fn):
        assert fn(np.eye(2)) == 1.0

    def test_pythagorean_row(self):
        assert nuclear_norm_2([[3, 4]]) == 5.0

    def test_three_bus_fixture(self):
        assert nuclear_norm_2(FIXTURE_Z) == pytest.approx(ROW2_NORM, abs=1e-15)
        assert nuclear_norm_2(FIXTURE_Z) == pytest.approx(0.352931, abs=1e-6)
        assert nuclear_norm_inf(FIXTURE_Z) == pytest.approx(math.sqrt(Z22_SQ), abs=1e-15)
        assert nuclear_norm_inf(FIXTURE_Z) == pytest.approx(0.322726, abs=1e-6)

    def test_uses_modulus_for_complex_entries(self):
        # plain squares would give 1 + (1j)^2 = 0
        assert nuclear_norm_2([[1, 1j]]) == pytest.approx(math.sqrt(2))

    def test_empty_rejected(self):
        with pytest.raises(DimensionError):
            nuclear_norm_2(np.zeros((0, 0)))

    @given(hnp.arrays(complex, hnp.array_shapes(min_dims=2, max_dims=2, max_side=6),
                      elements=st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False)))
    def test_ordering(self, A):
        assert nuclear_norm_inf(A) <= nuclear_norm_2(A) * (1 + 1e-12)


class TestBase:
    def test_zero_load(self):
        for norm in (2, "inf"):
            v = certify_base(FIXTURE_Z, [0, 0], 1.3, norm)
            assert v.certified and v.margin == pytest.approx(1.69)

    def test_three_bus_fixture_equal_loads(self):
        v = certify_base(FIXTURE_Z, [0.1, 0.1], 1.0, 2)
        lhs = 4 * ROW2_NORM * math.sqrt(0.02)
        assert v.certified
        assert v.criterion == "norm2"
        assert 1 - v.margin == pytest.approx(lhs, rel=1e-13)
        assert 1 - v.margin == pytest.approx(0.19965, abs=1e-5)

    def test_two_bus_over_limit(self):
        v = certify_base([[1]], [0.26], 1.0, 2)
        assert not v.certified
        assert v.margin == pytest.approx(-0.04)

    def test_inf_norm_uses_one_norm_of_loads(self):
        v = certify_base(FIXTURE_Z, [0.1, 0.2j], 1.0, "inf")
        assert v.criterion == "norm_inf"
        assert 1 - v.margin == pytest.approx(4 * math.sqrt(Z22_SQ) * 0.3)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            certify_base(FIXTURE_Z, [0.1], 1.0)

    def test_bad_norm(self):
        with pytest.raises(ValueError):
            certify_base(FIXTURE_Z, [0.1, 0.1], 1.0, 3)


class TestRescaled:
    @pytest.mark.parametrize("norm", [2, "inf"])
    def test_identity_rescaling_is_bitwise_base(self, norm):
        s = [0.3 - 0.1j, 0.05 + 0.2j]
        base = certify_base(FIXTURE_Z, s, 1.0, norm)
        resc = certify_rescaled(FIXTURE_Z, s, 1.0, [1.0, 1.0], norm)
        assert resc.certified == base.certified
        assert resc.margin == base.margin

    def test_rescaling_can_flip_the_verdict(self):
        v = certify_rescaled(FIXTURE_Z, [0.1, 0.1], 1.0, [1, 10], 2)
        row2 = math.sqrt(1 / 49 + 100 * Z22_SQ)
        vec = math.sqrt(0.01 + 0.0001)
        assert row2 == pytest.approx(3.23042, abs=1e-5)
        assert vec == pytest.approx(0.100499, abs=1e-6)
        assert not v.certified
        assert 1 - v.margin == pytest.approx(4 * row2 * vec, rel=1e-13)
        assert 1 - v.margin == pytest.approx(1.2986, abs=1e-4)

    def test_accepts_diagonal_matrix(self):
        a = certify_rescaled(FIXTURE_Z, [0.1, 0.1], 1.0, np.diag([2.0, 3.0]), 2)
        b = certify_rescaled(FIXTURE_Z, [0.1, 0.1], 1.0, [2.0, 3.0], 2)
        assert a == b

    @pytest.mark.parametrize("lam", [[1, 0], [1, -2], [1, np.inf], [1 + 1j, 1], [[1, 1], [0, 1]]])
    def test_invalid_rescaling(self, lam):
        with pytest.raises(ValueError):
            certify_rescaled(FIXTURE_Z, [0.1, 0.1], 1.0, lam)

    @settings(max_examples=200)
    @given(st.floats(0.01, 2), st.floats(-3, 3), st.floats(-3, 3), st.floats(1e-3, 1e3),
           st.sampled_from([2, "inf"]))
    def test_single_load_invariance(self, z, p, q, lam, norm):
        s = [complex(p, q)]
        base = certify_base([[z]], s, 1.0, norm)
        resc = certify_rescaled([[z]], s, 1.0, [lam], norm)
        assume(abs(base.margin) > 1e-12)
        assert resc.certified == base.certified
        assert resc.margin == pytest.approx(base.margin, abs=1e-12)


class TestRhombus:
    def test_two_bus(self):
        np.testing.assert_allclose(rhombus([[1]], 1.0).s_max, [0.25])

    def test_three_bus_fixture(self):
        np.testing.assert_allclose(rhombus(FIXTURE_Z, 1.0).s_max, [1.75, 1 / (4 * math.sqrt(Z22_SQ))], rtol=1e-14)
        np.testing.assert_allclose(rhombus(FIXTURE_Z, 1.0).s_max, [1.75, 0.77465], atol=1e-5)

    @given(st.floats(0.1, 10))
    def test_voltage_homogeneity(self, c):
        np.testing.assert_allclose(rhombus(FIXTURE_Z, c).s_max, c * c * rhombus(FIXTURE_Z, 1.0).s_max, rtol=1e-13)

    def test_zero_column(self):
        with pytest.raises(ValueError, match="all zero"):
            rhombus([[1, 0], [0, 0]], 1.0)

    def test_vertices(self):
        V = rhombus(FIXTURE_Z, 1.0).vertices()
        assert V.shape == (4, 2)
        np.testing.assert_allclose(V[0], [1.75, 0])
        np.testing.assert_allclose(V[3], [0, -rhombus(FIXTURE_Z, 1.0).s_max[1]])


class TestHull:
    @pytest.mark.parametrize("k", [0, 1])
    def test_vertices_are_on_the_boundary(self, k):
        rh = rhombus(FIXTURE_Z, 1.0)
        s = np.zeros(2, complex)
        s[k] = rh.s_max[k]
        v = certify_hull(rh, s)
        assert v.certified and v.margin == 0.0
        s[k] *= 1.01
        assert not certify_hull(rh, s).certified

    def test_three_bus_fixture_equal_loads(self):
        v = certify_hull(rhombus(FIXTURE_Z, 1.0), [0.1, 0.1])
        expected = 0.1 / 1.75 + 0.1 * 4 * math.sqrt(Z22_SQ)
        assert expected == pytest.approx(0.18623, abs=1e-5)
        assert v.certified
        assert v.margin == pytest.approx(1 - expected, rel=1e-13)

    def test_uses_complex_modulus(self):
        rh = rhombus([[1]], 1.0)
        assert hull_ratio(rh, [0.15 + 0.2j]) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            certify_hull(rhombus(FIXTURE_Z, 1.0), [0.1])

    def test_certify_all(self):
        out = certify_all(FIXTURE_Z, [0.1, 0.1], 1.0)
        assert set(out) == {"norm2", "norm_inf", "hull"}


class TestLambdaGrid:
    def test_default_grid(self):
        grid = lambda_grid(0.5, 25, 8, 2)
        assert grid.shape == (64, 2)
        axis = np.unique(grid[:, 0])
        np.testing.assert_allclose(axis[[0, -1]], [0.5, 25])
        ratios = axis[1:] / axis[:-1]
        np.testing.assert_allclose(ratios, ratios[0])

    def test_single_point(self):
        np.testing.assert_array_equal(lambda_grid(0.5, 25, 1, 3), [[0.5, 0.5, 0.5]])

    @pytest.mark.parametrize("args", [(0.5, 25, 8, 0), (0, 25, 8, 2), (5, 1, 8, 2), (0.5, 25, 0, 2)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            lambda_grid(*args)

    def test_overflow_guard(self):
        with pytest.raises(OverflowError):
            lambda_grid(0.5, 25, 11, 6)


def test_verdict_rejects_unknown_criterion():
    with pytest.raises(ValueError):
        CertificateVerdict(True, "magic", 1.0)


# ---------------------------------------------------------------- properties


def _random_case(rng, chain=False):
    net = random_radial_network(rng, chain=chain)
    Z = net.impedance().entries
    n = Z.shape[0]
    lam = np.exp(rng.uniform(np.log(0.05), np.log(50), n))
    w = rng.normal(size=n) + 1j * rng.normal(size=n)
    return Z, n, lam, w


@pytest.mark.parametrize("seed", range(20))
def test_hull_envelopes_inf_norm_rescalings(seed):
    rng = np.random.default_rng(seed)
    for _ in range(50):
        Z, n, lam, w = _random_case(rng)
        t = 1.0 / criterion_lhs(Z, w, "inf", lam)
        # exactly on the rescaled boundary, and just inside
        for s in (w * t, w * t * (1 - 1e-9)):
            if certify_rescaled(Z, s, 1.0, lam, "inf").certified:
                assert certify_hull(rhombus(Z, 1.0), s).margin >= -1e-12


@pytest.mark.parametrize("seed", range(20))
def test_hull_envelopes_2_norm_rescalings_on_a_single_feeder(seed):
    # on a chain the last row of |Z| holds every column maximum, so the
    # Cauchy-Schwarz inequality puts each rescaled ellipsoid inside the hull
    rng = np.random.default_rng(seed)
    for _ in range(50):
        Z, n, lam, w = _random_case(rng, chain=True)
        s = w / criterion_lhs(Z, w, 2, lam)
        assert certify_hull(rhombus(Z, 1.0), s).margin >= -1e-12


def test_2_norm_rescaling_can_exceed_hull_on_branched_feeder():
    # two loads on separate laterals: Z = I; each bus alone is a 2-bus system
    Z = np.eye(2)
    s = [0.15, 0.15]
    assert certify_base(Z, s, 1.0, 2).certified
    assert certify_hull(rhombus(Z, 1.0), s).margin == pytest.approx(-0.2)


@settings(max_examples=200)
@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False), min_size=2, max_size=2),
       st.lists(st.floats(0, 1), min_size=2, max_size=2))
def test_hull_monotone(s, shrink):
    rh = rhombus(FIXTURE_Z, 1.0)
    smaller = [x * f for x, f in zip(s, shrink)]
    if certify_hull(rh, s).certified:
        assert certify_hull(rh, smaller).certified


@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False), min_size=2, max_size=2),
       st.floats(1e-3, 1e3))
def test_hull_scale_covariance(s, c):
    rh = rhombus(FIXTURE_Z, 1.0)
    assert hull_ratio(rh, np.array(s) * c) == pytest.approx(c * hull_ratio(rh, s), rel=1e-12, abs=1e-300)


@settings(max_examples=100)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False), min_size=2, max_size=2),
       st.sampled_from(["norm2", "norm_inf", "hull"]))
def test_verdict_matches_margin_sign(s, which):
    v = certify_all(FIXTURE_Z, s, 1.0)[which]
    assert v.certified == (v.margin >= 0)
