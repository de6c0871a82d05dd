import numpy as np
import pytest

from oblivious_perturbation.src.common.common_errors import CapabilityError, InvalidArgumentError
from oblivious_perturbation.src.rng.rng_bit_source import BitSource
from oblivious_perturbation.src.kwise.kwise_field import (
    REDUCTION_EXPONENTS, SUPPORTED_DEGREES, GFContext, field_degree_for, get_context, is_irreducible,
    polynomial_from_exponents, polynomial_mod)
from oblivious_perturbation.src.kwise.kwise_family import (
    KWiseSignFamily, make_family, verify_kwise_uniformity)

def has_no_small_factor(polynomial):
    """Trial division by every polynomial of degree at most half"""
    degree = polynomial.bit_length() - 1
    divisor = 2
    while 2 * (divisor.bit_length() - 1) <= degree:
        if polynomial_mod(polynomial, divisor) == 0:
            return False
        divisor += 1
    return True

@pytest.fixture
def ctx(request):
    """Field context of the parametrized degree"""
    return get_context(request.param)

class TestField:
    def test_every_degree_supported(self):
        assert SUPPORTED_DEGREES == tuple(range(3, 65))

    @pytest.mark.parametrize("m", SUPPORTED_DEGREES)
    def test_pinned_polynomials_irreducible(self, m):
        assert is_irreducible(polynomial_from_exponents(REDUCTION_EXPONENTS[m]))

    @pytest.mark.parametrize("m", range(2, 17))
    def test_irreducibility_matches_trial_division(self, m):
        for polynomial in range(1 << m, 1 << (m + 1), 97):
            assert is_irreducible(polynomial) == has_no_small_factor(polynomial)

    @pytest.mark.parametrize("polynomial, expected", [(0b111, True), (0b10001, False), (0b101, False), (0b1011, True)])
    def test_irreducibility_check(self, polynomial, expected):
        assert is_irreducible(polynomial) == expected

    @pytest.mark.parametrize("domain, m", [(1, 3), (8, 3), (9, 4), (1 << 20, 20), ((1 << 40) + 1, 41), (1 << 63, 63), ((1 << 63) + 1, 64)])
    def test_field_degree_for(self, domain, m):
        assert field_degree_for(domain) == m

    def test_field_degree_too_large(self):
        with pytest.raises(CapabilityError):
            field_degree_for((1 << 64) + 1)

    def test_unsupported_degree(self):
        with pytest.raises(CapabilityError):
            GFContext(65)

    @pytest.mark.parametrize("ctx", [3, 4, 8], indirect=["ctx"])
    def test_inverses(self, ctx):
        for a in range(1, ctx.order):
            assert ctx.multiply(a, ctx.inverse(a)) == 1

    @pytest.mark.parametrize("ctx", [5, 12], indirect=["ctx"])
    def test_group_order(self, ctx):
        for a in (1, 2, 3, ctx.order - 1):
            assert ctx.power(a, ctx.order - 1) == 1

    @pytest.mark.parametrize("ctx", [6, 16, 40, 64], indirect=["ctx"])
    def test_vectorized_multiply_matches_scalar(self, ctx):
        source = BitSource(ctx.m)
        a = [source.next_int(ctx.m) for _ in range(50)]
        b = [source.next_int(ctx.m) for _ in range(50)]
        expected = [ctx.multiply(x, y) for x, y in zip(a, b)]
        assert ctx.multiply_array(np.array(a, dtype=np.uint64), np.array(b, dtype=np.uint64)).tolist() == expected

    def test_zero_has_no_inverse(self):
        with pytest.raises(InvalidArgumentError):
            get_context(3).inverse(0)

class TestFamily:
    def test_consumes_k_times_m_bits(self, src):
        make_family(4, 10, src)
        assert src.bits_consumed == 40

    def test_vectorized_signs_match_scalar(self, src):
        family = make_family(4, 8, src)
        points = np.arange(256, dtype=np.uint64)
        assert family.signs_at(points).tolist() == [family.sign_at(int(i)) for i in range(256)]

    def test_index_outside_field(self, src):
        family = make_family(2, 3, src)
        with pytest.raises(InvalidArgumentError):
            family.signs_at(np.array([8], dtype=np.uint64))

    def test_domain_must_fit(self, src):
        with pytest.raises(InvalidArgumentError):
            make_family(2, 3, src, domain=9)

    def test_constant_family(self):
        family = KWiseSignFamily(1, get_context(3), (1,))
        assert set(family.signs_at(np.arange(8, dtype=np.uint64)).tolist()) == {-1}

    def test_equality(self):
        assert make_family(3, 5, BitSource(2)) == make_family(3, 5, BitSource(2))

    def test_golden_signs(self, golden):
        family = make_family(4, 8, BitSource(7))
        assert family.coeffs == (160, 6, 65, 169)
        golden("kwise_family_seed7_signs", family.signs_at(np.arange(8, dtype=np.uint64)))

class TestAudit:
    @pytest.mark.parametrize("m, k", [(3, 2), (3, 4), (4, 4)])
    def test_exhaustive_uniformity(self, m, k):
        audit = verify_kwise_uniformity(m, k)
        assert audit.uniform
        assert audit.max_deviation == 0
        assert audit.pairwise_uncorrelated
        assert audit.bias_free
        assert audit.families == 1 << (m * k)

    def test_order_one_is_not_pairwise(self):
        audit = verify_kwise_uniformity(3, 1)
        assert audit.uniform
        assert audit.tuples_checked == 8

    def test_audit_size_limit(self):
        with pytest.raises(InvalidArgumentError):
            verify_kwise_uniformity(8, 4)
