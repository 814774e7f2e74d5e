"""Primes, quadratic characters, and small finite fields.

Elements of ``F_q`` (``q = p**k``) are encoded as integers ``0 <= x < q``
holding the base-``p`` digits of the coefficient vector with respect to the
power basis ``1, t, ..., t**(k-1)`` of ``F_p[t] / (modulus)``.  For ``k = 1``
this is just the residue mod ``p``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np

from .errors import ConstructionError, DomainError, EmptyRangeError, SizeError

FIELD_SIZE_LIMIT = 2**20
MAX_EXTENSION_DEGREE = 6


@dataclass(frozen=True)
class PrimeList:
    limit: int
    primes: tuple[int, ...]

    def __len__(self):
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)

    def __getitem__(self, i):
        return self.primes[i]


def sieve_primes(limit: int) -> PrimeList:
    """All primes ``<= limit`` by the sieve of Eratosthenes."""
    if limit < 2:
        raise EmptyRangeError(f"no primes <= {limit}")
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for i in range(2, int(limit**0.5) + 1):
        if mask[i]:
            mask[i * i :: i] = False
    return PrimeList(limit, tuple(int(p) for p in np.flatnonzero(mask)))


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for sp in small:
        if n % sp == 0:
            return n == sp
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol ``(a / n)``.

    Standard extension of the Jacobi symbol: ``(a/2)`` is 0 for even ``a``,
    +1 for ``a = ±1 mod 8`` and -1 for ``a = ±3 mod 8``; ``(a/-1)`` is the
    sign of ``a``.
    """
    if n == 0:
        raise DomainError("kronecker symbol (a/0) is undefined here")
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 == 1 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a / n) for odd n > 0
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


# ---------------------------------------------------------------------------
# polynomials over F_p, coefficient lists low -> high

def _ptrim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a, m, p):
    a = _ptrim(a)
    m = _ptrim(m)
    inv_lead = pow(m[-1], -1, p)
    while len(a) >= len(m):
        c = a[-1] * inv_lead % p
        shift = len(a) - len(m)
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mc) % p
        a = _ptrim(a)
    return a


def _pmulmod(a, b, m, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _pmod(out, m, p)


def _pgcd(a, b, p):
    a, b = _ptrim(a), _ptrim(b)
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _ppowmod(a, e, m, p):
    result = [1]
    base = _pmod(a, m, p)
    while e:
        if e & 1:
            result = _pmulmod(result, base, m, p)
        base = _pmulmod(base, base, m, p)
        e >>= 1
    return result


def is_irreducible(modulus, p: int) -> bool:
    """Rabin-style test: no factor of degree <= k/2 divides ``modulus``."""
    m = _ptrim([c % p for c in modulus])
    k = len(m) - 1
    if k <= 0:
        return False
    if k == 1:
        return True
    xp = [0, 1]
    for _ in range(k // 2):
        xp = _ppowmod(xp, p, m, p)
        diff = list(xp) + [0] * max(0, 2 - len(xp))
        diff[1] = (diff[1] - 1) % p
        if len(_pgcd(m, diff, p)) > 1:
            return False
    return True


@dataclass(frozen=True)
class FieldDescriptor:
    """The field ``F_p[t] / (modulus)`` with ``q = p**k`` elements.

    ``modulus`` is stored low -> high including the leading 1.  For ``k = 1``
    the modulus is ``(0, 1)`` by convention and elements are residues.
    """

    p: int
    k: int
    modulus: tuple[int, ...]

    @property
    def q(self) -> int:
        return self.p**self.k

    # -- encoding -----------------------------------------------------------
    def coeffs(self, x: int) -> list[int]:
        out = []
        for _ in range(self.k):
            x, r = divmod(x, self.p)
            out.append(r)
        return out

    def encode(self, coeffs) -> int:
        x = 0
        for c in reversed(list(coeffs)[: self.k]):
            x = x * self.p + c % self.p
        return x

    # -- scalar arithmetic --------------------------------------------------
    def add(self, x: int, y: int) -> int:
        if self.k == 1:
            return (x + y) % self.p
        return self.encode(a + b for a, b in zip(self.coeffs(x), self.coeffs(y)))

    def neg(self, x: int) -> int:
        return self.encode(-a for a in self.coeffs(x))

    def sub(self, x: int, y: int) -> int:
        return self.add(x, self.neg(y))

    def mul(self, x: int, y: int) -> int:
        if self.k == 1:
            return x * y % self.p
        prod = _pmulmod(self.coeffs(x), self.coeffs(y), self.modulus, self.p)
        return self.encode(prod + [0] * (self.k - len(prod)))

    def pow(self, x: int, e: int) -> int:
        if self.k == 1:
            return pow(x, e, self.p)
        result, base = 1, x
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inverse(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self.pow(x, self.q - 2)

    def from_int(self, n: int) -> int:
        return n % self.p

    # -- vectorised arithmetic on coefficient arrays of shape (..., k) -------
    def vec_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        p, k = self.p, self.k
        if k == 1:
            return a * b % p
        full = np.zeros(np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (2 * k - 1,), dtype=np.int64)
        for i in range(k):
            for j in range(k):
                full[..., i + j] += a[..., i] * b[..., j]
        full %= p
        m = self.modulus
        for d in range(2 * k - 2, k - 1, -1):
            c = full[..., d]
            for i in range(k):
                full[..., d - k + i] -= c * m[i]
            full[..., d] = 0
            full %= p
        return full[..., :k]

    def vec_encode(self, a: np.ndarray) -> np.ndarray:
        code = np.zeros(a.shape[:-1], dtype=np.int64)
        for i in range(self.k - 1, -1, -1):
            code = code * self.p + a[..., i]
        return code

    def vec_elements(self) -> np.ndarray:
        """All ``q`` elements as a ``(q, k)`` coefficient array, in code order."""
        codes = np.arange(self.q, dtype=np.int64)
        out = np.empty((self.q, self.k), dtype=np.int64)
        for i in range(self.k):
            out[:, i] = codes % self.p
            codes //= self.p
        return out

    # -- quadratic character --------------------------------------------------
    @cached_property
    def square_table(self) -> np.ndarray:
        """``chi(x)`` for every code ``x``, as int8, built by squaring all elements."""
        table = np.full(self.q, -1, dtype=np.int8)
        elems = self.vec_elements()
        table[self.vec_encode(self.vec_mul(elems, elems))] = 1
        table[0] = 0
        return table


def quadratic_character(F: FieldDescriptor, x: int) -> int:
    """0, +1 or -1 as ``x`` is zero, a nonzero square, or a non-square in ``F``."""
    if x == 0:
        return 0
    if F.k == 1:
        return int(F.square_table[x % F.p])
    if F.p == 2:
        # squaring is the Frobenius, a bijection
        return 1
    r = F.pow(x, (F.q - 1) // 2)
    return 1 if r == 1 else -1


def build_extension_field(p: int, k: int = 1) -> FieldDescriptor:
    """``F_{p^k}`` with the lexicographically first monic irreducible modulus.

    Candidates ``t^k + c_{k-1} t^{k-1} + ... + c_0`` are ordered by the tuple
    ``(c_{k-1}, ..., c_0)``, so over ``F_2`` the cubic is ``t^3 + t + 1``.
    """
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if not 1 <= k <= MAX_EXTENSION_DEGREE:
        raise SizeError(f"extension degree {k} outside 1..{MAX_EXTENSION_DEGREE}")
    if p**k > FIELD_SIZE_LIMIT:
        raise SizeError(f"field size {p}^{k} exceeds {FIELD_SIZE_LIMIT}")
    if k == 1:
        return FieldDescriptor(p, 1, (0, 1))
    for high_to_low in product(range(p), repeat=k):
        modulus = tuple(reversed(high_to_low)) + (1,)
        if is_irreducible(modulus, p):
            F = FieldDescriptor(p, k, modulus)
            expected = F.q - 1 if p == 2 else (F.q - 1) // 2
            if int(np.count_nonzero(F.square_table == 1)) != expected:
                raise ConstructionError(f"modulus {modulus} failed the square count check")
            return F
    raise ConstructionError(f"no irreducible polynomial of degree {k} over F_{p}")
