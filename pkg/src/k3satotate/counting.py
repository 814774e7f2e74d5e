"""Point counts on the seven double sextic models and their normalized Frobenius traces.

A model is ``X': w^2 = f(x, y, z)`` with ``f`` a sextic form.  Over ``F_q``

    #X'(F_q) = q^2 + q + 1 + sum_{P in P^2(F_q)} chi_q(f(P)),

and the transcendental trace is recovered from

    #X'(F_q) = 1 + q * a(q) + q * Tr + q^2,

where ``a(q)`` is the trace of Frobenius on the algebraic classes other than
the blown-down nodes.  For all but one catalogued model those classes are
Galois-invariant, so ``a(q) = r - r0``.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable

import numpy as np
import sympy

from . import _kernel
from .errors import (
    BadPrimeError,
    DomainError,
    EmptyRangeError,
    SizeError,
    StaleCacheError,
    UnknownLabelError,
    WeilBoundError,
)
from .ntheory import FieldDescriptor, build_extension_field, is_prime, kronecker, sieve_primes

COUNT_VERSION = "1"
EXTENSION_BUDGET = 4096

_X, _Y, _Z = sympy.symbols("x y z")


@dataclass(frozen=True)
class SurfaceModel:
    id: str
    equation: str
    r: int
    r0: int
    bad_primes: frozenset[int]
    jump: int
    group: str
    jump_conjectural: bool = False
    zero_trace: Callable[[int], bool] | None = field(default=None, compare=False)
    zero_trace_rule: str = ""
    # discriminants D whose characters, with the trivial one, make up the
    # Frobenius action on the non-node algebraic classes (empty: all trivial)
    algebraic_characters: tuple[int, ...] = ()

    @property
    def transcendental_rank(self) -> int:
        return 22 - self.r

    @cached_property
    def poly(self) -> sympy.Poly:
        return sympy.Poly(sympy.sympify(self.equation, locals={"x": _X, "y": _Y, "z": _Z}), _X, _Y, _Z)

    @cached_property
    def terms(self) -> tuple[np.ndarray, np.ndarray]:
        """``(coeffs, exps)`` of the expanded sextic as int64 arrays."""
        items = self.poly.terms()
        exps = np.array([e for e, _ in items], dtype=np.int64)
        coeffs = np.array([int(c) for _, c in items], dtype=np.int64)
        return coeffs, exps

    def is_good(self, p: int) -> bool:
        return p != 2 and p not in self.bad_primes

    def algebraic_trace(self, p: int, k: int = 1) -> int:
        """Trace of ``Frob_{p^k}`` on the algebraic classes not blown down to nodes."""
        if not self.algebraic_characters:
            return self.r - self.r0
        return 1 + sum(kronecker(D, p) ** k for D in self.algebraic_characters)


def catalog() -> list[SurfaceModel]:
    """The seven surfaces ``X1 .. X7``."""
    return [
        SurfaceModel(
            "X1",
            "x*y*z*(x + y + z)*(3*x + 5*y + 7*z)*(-5*x + 11*y - 2*z)",
            16, 15, frozenset({2, 3, 5, 7, 11, 13, 29}), -6006, "x1",
        ),
        SurfaceModel(
            "X2",
            "x*y*z*(2*x + 4*y - 3*z)*(x - 5*y - 3*z)*(x + 3*y + 3*z)",
            16, 15, frozenset({2, 3, 5, 7}), 1, "x2",
        ),
        SurfaceModel(
            "X3",
            "x*y*z*(4*x + 9*y + z)*(-x - y - 4*z)*(16*x + 25*y + z)",
            17, 15, frozenset({2, 3, 5}), 1, "x3",
        ),
        SurfaceModel(
            "X4",
            "x*y*z*(x + y + z)*(x + 2*y + 3*z)*(5*x + 8*y + 20*z)",
            16, 15, frozenset({2, 3, 5, 7, 11}), -1, "x4",
            zero_trace=lambda p: p % 4 == 3,
            zero_trace_rule="p = 3 mod 4",
        ),
        SurfaceModel(
            "X5",
            "x*y*(x**4 - 7*x**3*y - x**3*z + 19*x**2*y**2 + 4*x**2*y*z + x**2*z**2 - 23*x*y**3"
            " - 7*x*y**2*z - 6*x*y*z**2 - x*z**3 + 11*y**4 + 7*y**3*z + 9*y**2*z**2 + 3*y*z**3 + z**4)",
            16, 15, frozenset({2, 5}), 1, "x5",
            zero_trace=lambda p: p % 5 in (2, 3),
            zero_trace_rule="p = 2, 3 mod 5",
        ),
        SurfaceModel(
            "X6",
            "x*y*z*(x**3 - 14*x**2*z + 11*x*y**2 - x*z**2 + 12*y**3 - 14*y**2*z - 12*y*z**2 + 14*z**3)",
            16, 12, frozenset({2, 3, 5, 7, 11, 13, 17, 47}), 3, "x6",
            jump_conjectural=True,
            zero_trace=lambda p: p % 12 in (5, 7),
            zero_trace_rule="p = +-5 mod 12 (conjectural)",
            algebraic_characters=(14, 42, -42),
        ),
        SurfaceModel(
            "X7",
            "x*y*z*(x**3 - 3*x**2*z - 3*x*y**2 - 3*x*y*z + y**3 + 9*y**2*z + 6*y*z**2 + z**3)",
            16, 15, frozenset({2, 3}), -1, "x7",
            zero_trace=lambda p: p % 36 not in (1, 35),
            zero_trace_rule="p != +-1 mod 36",
        ),
    ]


def surface(surface_id: str) -> SurfaceModel:
    key = surface_id.strip().upper()
    for s in catalog():
        if s.id == key:
            return s
    raise UnknownLabelError(f"unknown surface {surface_id!r}; known: X1..X7")


# ---------------------------------------------------------------------------
# counting


def _check_good(s: SurfaceModel, p: int):
    if p == 2:
        raise BadPrimeError("p = 2 is bad for every double cover model")
    if p in s.bad_primes:
        raise BadPrimeError(f"{p} is a bad prime of {s.id}")


def _prime_count(s: SurfaceModel, p: int, y_range: tuple[int, int] | None = None) -> int:
    coeffs, exps = s.terms
    chi = build_extension_field(p).square_table
    total = p * p + p + 1 + _kernel.line_character_sum(coeffs, exps, p, chi)
    lo, hi = y_range or (0, p)
    return total + _kernel.chart_character_sum(coeffs, exps, p, chi, lo, hi)


def _poly_in_z(s: SurfaceModel, F: FieldDescriptor, x: int, y: int) -> list[int]:
    """Coefficients (low -> high) of ``f(x, y, z)`` as a polynomial in ``z`` over ``F``."""
    coeffs, exps = s.terms
    out = [0] * 7
    for c, (a, b, e) in zip(coeffs.tolist(), exps.tolist()):
        v = F.mul(F.from_int(c), F.mul(F.pow(x, a), F.pow(y, b)))
        out[e] = F.add(out[e], v)
    return out


def _field_count(s: SurfaceModel, F: FieldDescriptor) -> int:
    """Row-by-row vectorised count over a general ``F_q``."""
    q = F.q
    chi = F.square_table.astype(np.int64)
    elems = F.vec_elements()
    one = F.from_int(1)

    def row_sum(x, y):
        poly = _poly_in_z(s, F, x, y)
        acc = np.zeros_like(elems)
        for c in reversed(poly):
            acc = F.vec_mul(acc, elems)
            acc[:, :] = (acc + np.array(F.coeffs(c))) % F.p
        return int(chi[F.vec_encode(acc)].sum())

    total = q * q + q + 1
    for y in range(q):
        total += row_sum(one, y)
    total += row_sum(0, one)
    coeffs, exps = s.terms
    top = sum(int(c) for c, e in zip(coeffs, exps) if e[0] == 0 and e[1] == 0)
    total += int(chi[F.from_int(top)])
    return total


def count_points(s: SurfaceModel, F: FieldDescriptor | int) -> int:
    """``#X'(F_q)`` by enumerating ``[1:y:z]``, ``[0:1:z]`` and ``[0:0:1]``."""
    if isinstance(F, int):
        F = build_extension_field(F)
    _check_good(s, F.p)
    if F.k == 1:
        return _prime_count(s, F.p)
    return _field_count(s, F)


def affine_count(s: SurfaceModel, p: int) -> int:
    """Independent oracle: ``(#{(x,y,z,w) in F_p^4 : w^2 = f} - 1) / (p - 1)``.

    Evaluates the expanded sextic on the whole cube with numpy, takes the
    character by Euler's criterion and divides out the scaling action.
    """
    _check_good(s, p)
    if p > 400:
        raise SizeError("affine oracle is meant for small primes")
    coeffs, exps = s.terms
    r = np.arange(p, dtype=np.int64)
    powers = np.ones((7, p), dtype=np.int64)
    for k in range(1, 7):
        powers[k] = powers[k - 1] * r % p
    val = np.zeros((p, p, p), dtype=np.int64)
    for c, (a, b, e) in zip(coeffs.tolist(), exps.tolist()):
        term = (c % p) * powers[a][:, None, None] % p
        term = term * powers[b][None, :, None] % p
        val = (val + term * powers[e][None, None, :]) % p
    # Euler's criterion via repeated squaring on the whole cube
    e, base, res = (p - 1) // 2, val.copy(), np.ones_like(val)
    while e:
        if e & 1:
            res = res * base % p
        base = base * base % p
        e >>= 1
    chi = np.where(res == p - 1, -1, res)
    solutions = int((1 + chi).sum())
    total, rem = divmod(solutions - 1, p - 1)
    if rem:
        raise AssertionError("affine count not divisible by p - 1")
    return total


def trace_from_count(N: int, q: int, r: int, r0: int) -> Fraction:
    """``(N - 1 - q^2 - q (r - r0)) / q``, checked against the Weil bound ``22 - r``."""
    if N < 0:
        raise DomainError("negative point count")
    t = Fraction(N - 1 - q * q - q * (r - r0), q)
    if abs(t) > 22 - r:
        raise WeilBoundError(f"trace {t} exceeds the Weil bound {22 - r} (q = {q})")
    return t


def surface_trace(s: SurfaceModel, p: int, k: int, N: int) -> Fraction:
    """Transcendental trace of ``Frob_{p^k}`` from a count, using the model's algebraic action."""
    q = p**k
    a = s.algebraic_trace(p, k)
    t = Fraction(N - 1 - q * q - q * a, q)
    if abs(t) > s.transcendental_rank:
        raise WeilBoundError(f"{s.id}: trace {t} exceeds the Weil bound {s.transcendental_rank} (q = {q})")
    return t


@dataclass(frozen=True)
class TraceRecord:
    p: int
    k: int
    q: int
    N: int
    trace: Fraction


def trace_record(s: SurfaceModel, p: int, N: int, k: int = 1) -> TraceRecord:
    q = p**k
    t = surface_trace(s, p, k, N)
    if (t * q).denominator != 1:
        raise AssertionError("q * trace must be integral")
    return TraceRecord(p, k, q, N, t)


def newton_power_sums(elementary: Iterable[Fraction], kmax: int) -> list[Fraction]:
    """Power sums ``s_1..s_kmax`` from elementary symmetric ``e_1, e_2, ...``."""
    e = [Fraction(1)] + [Fraction(v) for v in elementary]
    s: list[Fraction] = []
    for k in range(1, kmax + 1):
        acc = Fraction(0)
        for i in range(1, k):
            if i < len(e):
                acc += (-1) ** (i - 1) * e[i] * s[k - i - 1]
        ek = e[k] if k < len(e) else Fraction(0)
        acc += (-1) ** (k - 1) * k * ek
        s.append(acc)
    return s


def elementary_from_charpoly(coeffs: Iterable[Fraction]) -> list[Fraction]:
    """``e_i`` from a monic polynomial given high -> low (leading 1 first)."""
    c = [Fraction(v) for v in coeffs]
    if c[0] != 1:
        raise DomainError("characteristic polynomial must be monic")
    return [(-1) ** i * c[i] for i in range(1, len(c))]


def power_sum_check(s: SurfaceModel, p: int, kmax: int, budget: int = EXTENSION_BUDGET) -> list[Fraction]:
    """Traces ``s_k`` of ``Frob_p^k`` for ``k = 1..kmax`` from counts over ``F_{p^k}``."""
    if p**kmax > budget:
        raise SizeError(f"{p}^{kmax} exceeds the enumeration budget {budget}")
    out = []
    for k in range(1, kmax + 1):
        N = count_points(s, build_extension_field(p, k))
        out.append(surface_trace(s, p, k, N))
    return out


# ---------------------------------------------------------------------------
# caching and scans


@dataclass
class CountCache:
    """Raw counts ``q -> N`` for one surface, with provenance."""

    surface: str
    pmax: int = 0
    records: dict[int, int] = field(default_factory=dict)
    version: str = COUNT_VERSION

    def merge(self, new: dict[int, int]):
        for q, N in new.items():
            old = self.records.get(q)
            if old is not None and old != N:
                raise StaleCacheError(f"conflicting counts for q = {q}: {old} vs {N}")
            self.records[q] = N
        self.records = dict(sorted(self.records.items()))

    def to_text(self) -> str:
        lines = [f"# surface={self.surface} version={self.version} pmax={self.pmax}"]
        lines += [f"{q},{N}" for q, N in sorted(self.records.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CountCache":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise StaleCacheError("cache file has no provenance header")
        header = dict(item.split("=", 1) for item in lines[0][1:].split())
        try:
            cache = cls(header["surface"], int(header["pmax"]), {}, header["version"])
        except (KeyError, ValueError) as exc:
            raise StaleCacheError(f"malformed cache header: {lines[0]!r}") from exc
        recs = {}
        for line in lines[1:]:
            if not line.strip() or line.startswith("#"):
                continue
            q, N = line.split(",")
            recs[int(q)] = int(N)
        cache.merge(recs)
        return cache

    def save(self, path: str | os.PathLike):
        path = os.fspath(path)
        d = os.path.dirname(os.path.abspath(path))
        os.makedirs(d, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=d, prefix=".cache-")
        with os.fdopen(fd, "w") as fh:
            fh.write(self.to_text())
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str | os.PathLike, surface_id: str) -> "CountCache":
        if not os.path.exists(path):
            return cls(surface_id)
        with open(path) as fh:
            cache = cls.from_text(fh.read())
        if cache.surface != surface_id or cache.version != COUNT_VERSION:
            raise StaleCacheError(
                f"cache {path} is for surface={cache.surface} version={cache.version}, "
                f"expected surface={surface_id} version={COUNT_VERSION}"
            )
        return cache

    def traces(self, s: SurfaceModel, pmax: int | None = None) -> list[TraceRecord]:
        out = []
        for q, N in sorted(self.records.items()):
            if pmax is not None and q > pmax:
                continue
            if not is_prime(q):
                continue
            out.append(trace_record(s, q, N))
        return out


def good_primes(s: SurfaceModel, pmax: int) -> list[int]:
    primes = [p for p in sieve_primes(max(pmax, 2)) if s.is_good(p)] if pmax >= 2 else []
    if not primes:
        raise EmptyRangeError(f"no good primes of {s.id} up to {pmax}")
    return primes


def scan(
    s: SurfaceModel,
    pmax: int,
    cache_path: str | os.PathLike | None = None,
    threads: int = 1,
    flush_seconds: float = 60.0,
    progress: Callable[[int, int], None] | None = None,
) -> CountCache:
    """Counts for every good prime ``p <= pmax``, resuming from ``cache_path``.

    Work is handed to a thread pool (the compiled kernel releases the GIL);
    results are merged into a sorted dict, so the output does not depend on
    the schedule.  The cache file is rewritten atomically by this thread only.
    """
    primes = good_primes(s, pmax)
    cache = CountCache.load(cache_path, s.id) if cache_path else CountCache(s.id)
    todo = [p for p in primes if p not in cache.records]
    last = time.monotonic()

    def flush(force=False):
        nonlocal last
        if cache_path and (force or time.monotonic() - last > flush_seconds):
            cache.save(cache_path)
            last = time.monotonic()

    # big primes first keeps the pool busy until the end
    todo.sort(reverse=True)
    done = 0
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for p, N in zip(todo, pool.map(lambda p: _prime_count(s, p), todo)):
            cache.merge({p: N})
            done += 1
            if progress:
                progress(done, len(todo))
            flush()
    cache.pmax = max(cache.pmax, pmax)
    flush(force=True)
    return cache


def traces_csv(records: Iterable[TraceRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "q", "N", "trace_num", "trace_den"])
    for rec in records:
        w.writerow([rec.p, rec.q, rec.N, rec.trace.numerator, rec.trace.denominator])
    return buf.getvalue()
