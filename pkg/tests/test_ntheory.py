import itertools
import random

import pytest

from k3satotate.errors import DomainError, EmptyRangeError, SizeError
from k3satotate.ntheory import (
    build_extension_field,
    is_irreducible,
    is_prime,
    kronecker,
    quadratic_character,
    sieve_primes,
)


def trial_division(n):
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


class TestSieve:
    def test_small(self):
        assert list(sieve_primes(10)) == [2, 3, 5, 7]
        assert list(sieve_primes(2)) == [2]

    def test_count_to_1e5(self):
        primes = sieve_primes(10**5)
        assert len(primes) == 9592
        assert len(primes) == sum(1 for n in range(10**5 + 1) if trial_division(n))

    def test_empty(self):
        with pytest.raises(EmptyRangeError):
            sieve_primes(1)

    def test_is_prime_matches_sieve(self):
        ps = set(sieve_primes(5000))
        assert all(is_prime(n) == (n in ps) for n in range(5001))


class TestKronecker:
    def test_examples(self):
        assert kronecker(-1, 5) == 1
        assert kronecker(-1, 7) == -1

    def test_x1_character_against_euler(self):
        bad = {2, 3, 5, 7, 11, 13, 29}
        for p in sieve_primes(1000):
            if p <= 7 or p in bad:
                continue
            e = pow(-6006 % p, (p - 1) // 2, p)
            assert kronecker(-6006, p) == (1 if e == 1 else -1)

    def test_conventions(self):
        assert kronecker(3, 2) == -1  # 3 = 3 mod 8
        assert kronecker(7, 2) == 1
        assert kronecker(4, 2) == 0
        assert kronecker(5, -1) == 1
        assert kronecker(-5, -1) == -1
        assert kronecker(2, 15) == kronecker(2, 3) * kronecker(2, 5)

    def test_zero_modulus(self):
        with pytest.raises(DomainError):
            kronecker(3, 0)

    def test_agrees_with_prime_field_character(self):
        for p in [3, 5, 7, 11, 13, 101]:
            F = build_extension_field(p)
            for a in range(-30, 31):
                if a % p:
                    assert kronecker(a, p) == quadratic_character(F, a % p)


class TestFields:
    def test_prime_field(self):
        F = build_extension_field(7, 1)
        assert F.q == 7
        assert quadratic_character(F, 2) == 1
        assert quadratic_character(F, 0) == 0

    def test_f961_modulus_has_no_roots(self):
        F = build_extension_field(31, 2)
        assert F.q == 961 and len(F.modulus) == 3 and F.modulus[-1] == 1
        c0, c1, _ = F.modulus
        assert all((x * x + c1 * x + c0) % 31 for x in range(31))

    def test_f8_modulus(self):
        F = build_extension_field(2, 3)
        assert F.q == 8
        assert F.modulus == (1, 1, 0, 1)  # t^3 + t + 1
        # lexicographically first: t^3 + 1 and t^3 + t^2... come later or are reducible
        for cand in itertools.product(range(2), repeat=3):
            mod = tuple(reversed(cand)) + (1,)
            if mod == F.modulus:
                break
            assert not is_irreducible(mod, 2)

    def test_generator_of_f49_is_nonsquare(self):
        F = build_extension_field(7, 2)
        squares = {F.mul(x, x) for x in range(1, F.q)}
        gens = [g for g in range(1, F.q) if len({F.pow(g, e) for e in range(48)}) == 48]
        assert gens
        for g in gens:
            assert g not in squares
            assert quadratic_character(F, g) == -1

    @pytest.mark.parametrize("p,k", [(3, 1), (3, 2), (3, 3), (5, 2), (7, 2), (3, 6), (2, 4)])
    def test_character_multiplicative_and_balanced(self, p, k):
        F = build_extension_field(p, k)
        chi = [quadratic_character(F, x) for x in range(F.q)]
        if p > 2:
            assert sum(chi) == 0
        rng = random.Random(p * 10 + k)
        pairs = itertools.product(range(1, F.q), repeat=2) if F.q <= 81 else (
            (rng.randrange(1, F.q), rng.randrange(1, F.q)) for _ in range(3000)
        )
        for x, y in pairs:
            assert chi[F.mul(x, y)] == chi[x] * chi[y]

    def test_table_matches_exponentiation(self):
        F = build_extension_field(5, 3)
        for x in range(1, F.q):
            r = F.pow(x, (F.q - 1) // 2)
            assert F.square_table[x] == (1 if r == 1 else -1)

    @pytest.mark.parametrize("p,k", [(3, 4), (31, 2), (5, 3), (2, 5)])
    def test_field_axioms(self, p, k):
        F = build_extension_field(p, k)
        rng = random.Random(k)
        for _ in range(300):
            a, b, c = (rng.randrange(F.q) for _ in range(3))
            assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
            assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
            if a:
                assert F.mul(a, F.inverse(a)) == 1

    def test_size_limits(self):
        with pytest.raises(SizeError):
            build_extension_field(3, 7)
        with pytest.raises(SizeError):
            build_extension_field(1031, 2)
        with pytest.raises(DomainError):
            build_extension_field(9, 1)
