import random

import pytest

from srb.field import (
    DEFAULT_REDUCTION_POLY,
    binary_field,
    field_from_header,
    gf2_is_irreducible,
    is_prime,
    parse_field,
    prime_field,
)


def clmul_oracle(a, b, poly):
    """Independent carry-less multiply + reduce, for checking table paths."""
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        a <<= 1
        b >>= 1
    deg = poly.bit_length() - 1
    while acc.bit_length() - 1 >= deg and acc:
        acc ^= poly << (acc.bit_length() - 1 - deg)
    return acc


def test_prime_arithmetic_examples():
    f = prime_field(13)
    assert f.add(7, 9) == 3
    assert f.mul(7, 9) == 11
    assert f.sub(3, 7) == 9
    assert f.div(1, 7) == pow(7, -1, 13)


def test_identity_elements():
    for f in (prime_field(13), prime_field(257), binary_field(16)):
        rng = random.Random(0)
        for _ in range(50):
            a = rng.randrange(f.order)
            assert f.add(a, 0) == a
            assert f.mul(a, 1) == a


def test_binary_multiply_example():
    f = binary_field(4, 0b10011)  # x^4 + x + 1
    assert f.mul(0b1000, 0b0010) == 0b0011


def test_binary_multiply_matches_clmul_oracle_exhaustive_gf16():
    f = binary_field(4)
    for a in range(16):
        for b in range(16):
            assert f.mul(a, b) == clmul_oracle(a, b, f.poly)


def test_binary_multiply_matches_clmul_oracle_sampled_gf65536():
    f = binary_field(16)
    rng = random.Random(1)
    for _ in range(2000):
        a = rng.randrange(f.order)
        b = rng.randrange(f.order)
        assert f.mul(a, b) == clmul_oracle(a, b, f.poly)


@pytest.mark.parametrize("f", [prime_field(13), prime_field(257), binary_field(8), binary_field(16)])
def test_field_axioms(f):
    rng = random.Random(7)
    for _ in range(300):
        a, b, c = (rng.randrange(f.order) for _ in range(3))
        assert f.add(a, b) == f.add(b, a)
        assert f.mul(a, b) == f.mul(b, a)
        assert f.add(f.add(a, b), c) == f.add(a, f.add(b, c))
        assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
        assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
        assert f.sub(f.add(a, b), b) == a
        if a != 0:
            assert f.mul(a, f.inv(a)) == 1
            assert f.div(f.mul(a, b), a) == b


def test_division_by_zero():
    for f in (prime_field(13), binary_field(16)):
        with pytest.raises(ZeroDivisionError):
            f.div(5, 0)
        with pytest.raises(ZeroDivisionError):
            f.inv(0)


def test_out_of_range_operands_rejected():
    f = prime_field(13)
    with pytest.raises(ValueError):
        f.add(7, 20)
    with pytest.raises(ValueError):
        f.mul(-1, 3)
    with pytest.raises(ValueError):
        f.check(13)
    g = binary_field(4)
    with pytest.raises(ValueError):
        g.mul(16, 1)


def test_vandermonde_rows():
    f = prime_field(13)
    assert f.vandermonde_row(2, 4) == [1, 2, 4, 8]
    assert f.vandermonde_row(5, 1) == [1]
    assert f.vandermonde_row(0, 3) == [1, 0, 0]
    with pytest.raises(ValueError):
        f.vandermonde_row(2, 0)


def test_poly_eval():
    f = prime_field(13)
    assert f.poly_eval([1, 2, 4], 3) == (1 + 2 * 3 + 4 * 9) % 13
    assert f.poly_eval([5, 7, 11], 0) == 5
    assert f.poly_eval([9], 6) == 9
    with pytest.raises(ValueError):
        f.poly_eval([], 1)


def test_poly_eval_matches_direct_sum():
    rng = random.Random(3)
    for f in (prime_field(257), binary_field(16)):
        for _ in range(100):
            coeffs = [rng.randrange(f.order) for _ in range(rng.randint(1, 8))]
            x = rng.randrange(f.order)
            direct = 0
            for j, c in enumerate(coeffs):
                direct = f.add(direct, f.mul(c, f.pow_(x, j)))
            assert f.poly_eval(coeffs, x) == direct


def test_pow():
    f = prime_field(13)
    assert f.pow_(2, 0) == 1
    assert f.pow_(0, 0) == 1
    assert f.pow_(0, 5) == 0
    g = binary_field(16)
    assert g.pow_(3, g.order - 1) == 1


def test_bulk_helpers_match_scalar_ops():
    rng = random.Random(5)
    for f in (prime_field(257), binary_field(16)):
        vec_a = [rng.randrange(f.order) for _ in range(64)]
        vec_b = [rng.randrange(f.order) for _ in range(64)]
        c = rng.randrange(f.order)
        assert f.scale_vec(c, vec_a) == [f.mul(c, v) for v in vec_a]
        assert f.add_vec(vec_a, vec_b) == [f.add(x, y) for x, y in zip(vec_a, vec_b)]


def test_prime_validation():
    with pytest.raises(ValueError):
        prime_field(12)
    with pytest.raises(ValueError):
        prime_field(1)
    assert is_prime(65521)
    with pytest.raises(ValueError):
        prime_field(65537)  # above the 2^16 ceiling


def test_reduction_poly_validation():
    with pytest.raises(ValueError):
        binary_field(4, 0b10101)  # x^4 + x^2 + 1 = (x^2 + x + 1)^2
    with pytest.raises(ValueError):
        binary_field(4, 0b1011)  # degree 3, not 4
    with pytest.raises(ValueError):
        binary_field(17)


def test_default_polys_are_irreducible_exhaustively():
    for degree, poly in DEFAULT_REDUCTION_POLY.items():
        assert poly.bit_length() - 1 == degree
        assert gf2_is_irreducible(poly)


def test_gf2_irreducibility_reference_cases():
    assert gf2_is_irreducible(0b111)      # x^2 + x + 1
    assert not gf2_is_irreducible(0b110)  # x^2 + x = x(x + 1)
    assert not gf2_is_irreducible(0b1001) # x^3 + 1 = (x + 1)(x^2 + x + 1)
    assert gf2_is_irreducible(0b11111)    # x^4 + x^3 + x^2 + x + 1


def test_irreducible_but_not_primitive_poly_still_works():
    # x^4 + x^3 + x^2 + x + 1 is irreducible with x of order 5, not 15.
    f = binary_field(4, 0b11111)
    assert not f._primitive
    for a in range(16):
        for b in range(16):
            assert f.mul(a, b) == clmul_oracle(a, b, 0b11111)
        if a:
            assert f.mul(a, f.inv(a)) == 1


def test_header_round_trip_and_equality():
    for f in (prime_field(257), binary_field(16), binary_field(8)):
        g = field_from_header(f.header_kind, f.header_param)
        assert g == f
        assert hash(g) == hash(f)
    assert prime_field(13) != binary_field(4)


def test_parse_field():
    assert parse_field("prime:13") == prime_field(13)
    assert parse_field("binary:16") == binary_field(16)
    assert parse_field("binary:4:0x13") == binary_field(4, 0x13)
    with pytest.raises(ValueError):
        parse_field("gf:13")


def test_field_cache_returns_same_object():
    assert binary_field(16) is binary_field(16)
    assert prime_field(257) is prime_field(257)
