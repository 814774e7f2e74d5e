"""Trace moments of compact Lie groups by constant-term extraction.

For a connected group with maximal torus ``T`` the Weyl integration formula
turns ``E[tr^n]`` into ``CT(tr^n * prod_{a > 0} (1 - t^a)(1 - t^-a)) / #W``,
the constant term of a Laurent polynomial in the torus coordinates.  The
non-neutral coset ``O(2m) \\ SO(2m)`` is handled with its own eigenvalue
density on an ``(m-1)``-dimensional torus.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Sequence

from .errors import UnknownLabelError, UnsupportedComponentError, UnsupportedCosetError
from .laurent import LaurentPoly

K_MAX = 40

SO_ODD = "SO_odd"
SO_EVEN = "SO_even"
UNITARY = "U"

FULL = "full"
MIRRORED = "mirrored"
ATOM = "atom-at-zero"
TWISTED = "twisted-coset"


@dataclass(frozen=True)
class ConnectedBlock:
    """``SO(2m+1)``, ``SO(2m)`` or ``U(m)``; ``rank`` is the torus dimension ``m``.

    ``U(m)`` carries the trace ``2 Re Tr``, i.e. it sits in ``SO(2m)``.
    """

    kind: str
    rank: int

    def __post_init__(self):
        if self.kind not in (SO_ODD, SO_EVEN, UNITARY):
            raise ValueError(f"unknown block kind {self.kind!r}")
        if self.rank < 1:
            raise ValueError("block rank must be at least 1")

    @property
    def dimension(self) -> int:
        """Dimension of the real representation carrying the trace."""
        return 2 * self.rank + 1 if self.kind == SO_ODD else 2 * self.rank

    @property
    def weyl_order(self) -> int:
        m = self.rank
        if self.kind == SO_ODD:
            return 2**m * factorial(m)
        if self.kind == SO_EVEN:
            return 2 ** (m - 1) * factorial(m)
        return factorial(m)

    @property
    def trace_range(self) -> tuple[int, int]:
        if self.kind == SO_ODD:
            return 1 - 2 * self.rank, 1 + 2 * self.rank
        return -2 * self.rank, 2 * self.rank

    @property
    def label(self) -> str:
        if self.kind == UNITARY:
            return f"U{self.rank}"
        return f"SO{self.dimension}"

    def __str__(self):
        return self.label


def SO(n: int) -> ConnectedBlock:
    if n < 2:
        raise ValueError("SO(n) needs n >= 2")
    return ConnectedBlock(SO_ODD if n % 2 else SO_EVEN, n // 2)


def U(m: int) -> ConnectedBlock:
    return ConnectedBlock(UNITARY, m)


def positive_roots(block: ConnectedBlock) -> list[tuple[int, ...]]:
    """Positive roots as exponent vectors: ``B_m``, ``D_m`` or ``A_{m-1}``."""
    m = block.rank
    roots = []

    def unit(*pairs):
        e = [0] * m
        for i, s in pairs:
            e[i] += s
        return tuple(e)

    for i in range(m):
        for j in range(i + 1, m):
            roots.append(unit((i, 1), (j, -1)))
            if block.kind != UNITARY:
                roots.append(unit((i, 1), (j, 1)))
        if block.kind == SO_ODD:
            roots.append(unit((i, 1)))
    return roots


def trace_poly(block: ConnectedBlock) -> LaurentPoly:
    m = block.rank
    tr = LaurentPoly(m)
    for i in range(m):
        tr = tr + LaurentPoly.variable(m, i) + LaurentPoly.variable(m, i, -1)
    if block.kind == SO_ODD:
        tr = tr + 1
    return tr


def weyl_weight(block: ConnectedBlock) -> LaurentPoly:
    """``prod_{a in positive roots} (1 - t^a)(1 - t^-a)``."""
    m = block.rank
    w = LaurentPoly.constant(m)
    for a in positive_roots(block):
        neg = tuple(-x for x in a)
        w = w * (LaurentPoly.constant(m, 2) - LaurentPoly.monomial(m, a) - LaurentPoly.monomial(m, neg))
    return w


def coset_trace_poly(m: int) -> LaurentPoly:
    """Trace on the coset torus of ``O(2m)^-``: the pair ``{+1, -1}`` adds nothing."""
    n = m - 1
    tr = LaurentPoly(n)
    for i in range(n):
        tr = tr + LaurentPoly.variable(n, i) + LaurentPoly.variable(n, i, -1)
    return tr


def coset_weight(m: int) -> LaurentPoly:
    """Eigenangle weight of ``O(2m)^-`` with denominators cleared.

    ``prod_{j<k} (2c_j - 2c_k)^2 * prod_j (2 - z_j^2 - z_j^-2)`` where
    ``2c_j = z_j + 1/z_j``; this is ``prod (c_j - c_k)^2 prod sin^2`` up to a
    positive constant, which normalising by the constant term removes.
    """
    if m < 2:
        raise UnsupportedCosetError("the O(2m)^- coset needs m >= 2")
    n = m - 1
    c = [LaurentPoly.variable(n, i) + LaurentPoly.variable(n, i, -1) for i in range(n)]
    w = LaurentPoly.constant(n)
    for j in range(n):
        for k in range(j + 1, n):
            d = c[j] - c[k]
            w = w * d * d
    for j in range(n):
        w = w * (2 - LaurentPoly.variable(n, j, 2) - LaurentPoly.variable(n, j, -2))
    return w


def _pair_ct(power: LaurentPoly, weight: LaurentPoly) -> int | Fraction:
    """``CT(power * weight)`` without forming the product."""
    get = power.terms.get
    total = 0
    for e, c in weight.terms.items():
        v = get(tuple(-a for a in e))
        if v:
            total += c * v
    return total


def _ct_moments(tr: LaurentPoly, weight: LaurentPoly, K: int) -> list[int | Fraction]:
    """``[CT(tr^n * weight) for n in 0..K]``, pruning terms that can no longer reach the weight."""
    slack = weight.max_abs_exponents()
    m = tr.nvars
    out = []
    power = LaurentPoly.constant(m)
    for n in range(K + 1):
        out.append(_pair_ct(power, weight))
        if n == K:
            break
        remaining = K - n - 1
        nxt: dict = {}
        for e, c in power.terms.items():
            for s, cs in tr.terms.items():
                f = tuple(a + b for a, b in zip(e, s))
                if sum(max(0, abs(a) - w) for a, w in zip(f, slack)) > remaining:
                    continue
                nxt[f] = nxt.get(f, 0) + c * cs
        power = LaurentPoly(m, nxt)
    return out


@lru_cache(maxsize=None)
def _block_moments(block: ConnectedBlock, K: int) -> tuple[Fraction, ...]:
    cts = _ct_moments(trace_poly(block), weyl_weight(block), K)
    return tuple(Fraction(c, block.weyl_order) for c in cts)


@lru_cache(maxsize=None)
def _coset_moments(m: int, K: int) -> tuple[Fraction, ...]:
    w = coset_weight(m)
    norm = w.constant_term()
    return tuple(Fraction(c, norm) for c in _ct_moments(coset_trace_poly(m), w, K))


def _check_order(n: int):
    if n < 0:
        raise ValueError("moment order must be nonnegative")
    if n > K_MAX:
        raise ValueError(f"moment order {n} exceeds K_max = {K_MAX}")


def convolve_moments(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    """Moments of ``X + Y`` for independent ``X``, ``Y``: binomial convolution."""
    K = min(len(a), len(b)) - 1
    return [sum(comb(n, i) * a[i] * b[n - i] for i in range(n + 1)) for n in range(K + 1)]


def moment_sequence(blocks: Sequence[ConnectedBlock], K: int) -> list[Fraction]:
    """``[E[tr^n] for n = 0..K]`` on the product of ``blocks`` with additive trace."""
    _check_order(K)
    if not blocks:
        raise ValueError("need at least one block")
    seq = list(_block_moments(blocks[0], K))
    for b in blocks[1:]:
        seq = convolve_moments(seq, _block_moments(b, K))
    return seq


def moment(blocks: Sequence[ConnectedBlock] | ConnectedBlock, n: int) -> Fraction:
    if isinstance(blocks, ConnectedBlock):
        blocks = [blocks]
    _check_order(n)
    return moment_sequence(blocks, n)[n]


def product_torus(blocks: Sequence[ConnectedBlock]) -> tuple[LaurentPoly, LaurentPoly, int]:
    """Trace, Weyl weight and ``#W`` of a block product on the joint torus."""
    nvars = sum(b.rank for b in blocks)
    tr, w, order = LaurentPoly(nvars), LaurentPoly.constant(nvars), 1
    offset = 0
    for b in blocks:
        tr = tr + trace_poly(b).extend(nvars, offset)
        w = w * weyl_weight(b).extend(nvars, offset)
        order *= b.weyl_order
        offset += b.rank
    return tr, w, order


def moment_direct(blocks: Sequence[ConnectedBlock], n: int) -> Fraction:
    """Same as :func:`moment` but by one constant term on the joint torus."""
    _check_order(n)
    tr, w, order = product_torus(blocks)
    return Fraction(_ct_moments(tr, w, n)[n], order)


def coset_moment(block: ConnectedBlock, n: int) -> Fraction:
    """``E[tr^n]`` on ``O(2m) \\ SO(2m)`` for ``block = SO(2m)``."""
    if block.kind != SO_EVEN or block.rank < 2:
        raise UnsupportedCosetError(f"reflection coset of {block} is not supported (need SO(2m), m >= 2)")
    _check_order(n)
    return _coset_moments(block.rank, n)[n]


def coset_moment_sequence(block: ConnectedBlock, K: int) -> list[Fraction]:
    if block.kind != SO_EVEN or block.rank < 2:
        raise UnsupportedCosetError(f"reflection coset of {block} is not supported (need SO(2m), m >= 2)")
    _check_order(K)
    return list(_coset_moments(block.rank, K))


# ---------------------------------------------------------------------------
# disconnected groups


@dataclass(frozen=True)
class ComponentDescriptor:
    """A coset of the neutral component, described by how it acts on the blocks.

    ``permutation[i]`` is the block that block ``i`` is sent to; ``twists[i]``
    is ``"id"`` or ``"refl"`` (determinant -1 for SO blocks, complex
    conjugation for U blocks).
    """

    permutation: tuple[int, ...]
    twists: tuple[str, ...]

    def __post_init__(self):
        if sorted(self.permutation) != list(range(len(self.permutation))):
            raise ValueError(f"{self.permutation} is not a permutation")
        if len(self.twists) != len(self.permutation):
            raise ValueError("one twist per block required")
        if any(t not in ("id", "refl") for t in self.twists):
            raise ValueError(f"twists must be 'id' or 'refl', got {self.twists}")

    @classmethod
    def identity(cls, nblocks: int) -> "ComponentDescriptor":
        return cls(tuple(range(nblocks)), ("id",) * nblocks)

    @property
    def is_identity(self) -> bool:
        return self.permutation == tuple(range(len(self.permutation))) and all(t == "id" for t in self.twists)

    def determinant(self, blocks: Sequence[ConnectedBlock]) -> int:
        """Determinant sign of the component on the real representation.

        A cycle of length ``L`` through blocks of real dimension ``d`` permutes
        ``L * d`` coordinates with sign ``(-1)^((L - 1) d)``; a reflection
        twist contributes -1 on an SO block and ``(-1)^m`` (conjugation) on
        ``U(m)``.
        """
        sign = 1
        seen = set()
        for start in range(len(self.permutation)):
            if start in seen:
                continue
            length, i = 0, start
            while i not in seen:
                seen.add(i)
                i = self.permutation[i]
                length += 1
            sign *= (-1) ** ((length - 1) * blocks[start].dimension)
        for b, t in zip(blocks, self.twists):
            if t == "refl":
                sign *= (-1) ** b.rank if b.kind == UNITARY else -1
        return sign

    def classify(self, blocks: Sequence[ConnectedBlock]) -> str:
        if len(blocks) != len(self.permutation):
            raise ValueError("component acts on a different number of blocks")
        fixed = [i for i, j in enumerate(self.permutation) if i == j]
        if not fixed:
            return ATOM
        if len(fixed) != len(blocks):
            raise UnsupportedComponentError("partially permuting components are not supported")
        twisted = [i for i, t in enumerate(self.twists) if t == "refl"]
        if not twisted:
            return FULL
        if any(blocks[i].kind == UNITARY for i in twisted):
            if all(b.kind == UNITARY for b in blocks) and len(twisted) == len(blocks):
                return ATOM
            raise UnsupportedComponentError("conjugation on only some unitary blocks is not supported")
        if len(twisted) == len(blocks) and all(b.kind == SO_ODD for b in blocks):
            return MIRRORED
        if len(blocks) == 1 and blocks[0].kind == SO_EVEN:
            return TWISTED
        raise UnsupportedComponentError(f"component {self} on {list(map(str, blocks))} is not supported")


@dataclass(frozen=True)
class GroupSpec:
    """A Sato-Tate group: connected blocks plus equally weighted components."""

    blocks: tuple[ConnectedBlock, ...]
    components: tuple[ComponentDescriptor, ...]
    label: str = ""
    require_identity: bool = field(default=True, compare=False)

    def __post_init__(self):
        if not self.components:
            raise ValueError("a group needs at least one component")
        kinds = self.classifications
        if self.require_identity:
            if not any(c.is_identity for c in self.components):
                raise ValueError("the identity component must be present")
            for c, k in zip(self.components, kinds):
                if c.is_identity and k != FULL:
                    raise AssertionError("identity component must classify as full")

    @classmethod
    def connected(cls, *blocks: ConnectedBlock, label: str = "") -> "GroupSpec":
        return cls(tuple(blocks), (ComponentDescriptor.identity(len(blocks)),), label)

    @property
    def classifications(self) -> list[str]:
        return [c.classify(self.blocks) for c in self.components]

    @property
    def weights(self) -> list[Fraction]:
        return [Fraction(1, len(self.components))] * len(self.components)

    @property
    def atom_mass(self) -> Fraction:
        return Fraction(self.classifications.count(ATOM), len(self.components))

    @property
    def dimension(self) -> int:
        return sum(b.dimension for b in self.blocks)

    @property
    def determinants(self) -> list[int]:
        return [c.determinant(self.blocks) for c in self.components]

    def restrict(self, sign: int) -> "GroupSpec":
        """The components whose determinant is ``sign``; Frobenius lands there when
        the jump character takes the value ``sign``."""
        comps = tuple(c for c, d in zip(self.components, self.determinants) if d == sign)
        if not comps:
            raise ValueError(f"{self.label} has no component of determinant {sign}")
        suffix = "plus" if sign > 0 else "minus"
        return GroupSpec(self.blocks, comps, f"{self.label}-{suffix}", require_identity=False)


@dataclass(frozen=True)
class MomentSequence:
    values: tuple[Fraction, ...]
    label: str = ""

    def __post_init__(self):
        if self.values and self.values[0] != 1:
            raise AssertionError(f"m_0 = {self.values[0]}, expected 1")

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    @property
    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["group", "n", "numerator", "denominator"])
        for n, v in enumerate(self.values):
            w.writerow([self.label, n, v.numerator, v.denominator])
        return buf.getvalue()


def component_moments(spec: GroupSpec, kind: str, K: int) -> list[Fraction]:
    if kind == FULL:
        return moment_sequence(spec.blocks, K)
    if kind == MIRRORED:
        return [(-1) ** n * v for n, v in enumerate(moment_sequence(spec.blocks, K))]
    if kind == ATOM:
        return [Fraction(1)] + [Fraction(0)] * K
    if kind == TWISTED:
        return coset_moment_sequence(spec.blocks[0], K)
    raise ValueError(kind)


def mixture_moments(spec: GroupSpec, K: int) -> MomentSequence:
    _check_order(K)
    total = [Fraction(0)] * (K + 1)
    for weight, kind in zip(spec.weights, spec.classifications):
        for n, v in enumerate(component_moments(spec, kind, K)):
            total[n] += weight * v
    return MomentSequence(tuple(total), spec.label)


# ---------------------------------------------------------------------------
# named groups

def named_groups() -> dict[str, GroupSpec]:
    ident1 = ComponentDescriptor.identity(1)
    ident2 = ComponentDescriptor.identity(2)
    ident3 = ComponentDescriptor.identity(3)
    refl1 = ComponentDescriptor((0,), ("refl",))
    so3sq = (SO(3), SO(3))
    # order-four component groups on [SO3]^2: diag(+,+), diag(-,-) and two
    # block swaps with vanishing trace.  X5 swaps with one sign flip
    # (determinant +1, trivial jump character)
    rm_components = (
        ident2,
        ComponentDescriptor((0, 1), ("refl", "refl")),
        ComponentDescriptor((1, 0), ("id", "refl")),
        ComponentDescriptor((1, 0), ("refl", "id")),
    )
    # Z/6 acting on [U1]^3: powers of (3-cycle composed with conjugation)
    cyc = (1, 2, 0)
    cyc2 = (2, 0, 1)
    u1_components = (
        ident3,
        ComponentDescriptor(cyc, ("refl",) * 3),
        ComponentDescriptor(cyc2, ("id",) * 3),
        ComponentDescriptor((0, 1, 2), ("refl",) * 3),
        ComponentDescriptor(cyc, ("id",) * 3),
        ComponentDescriptor(cyc2, ("refl",) * 3),
    )
    # X6 swaps with no or two sign flips, which have determinant -1
    rm_components_odd = (
        ident2,
        ComponentDescriptor((0, 1), ("refl", "refl")),
        ComponentDescriptor((1, 0), ("id", "id")),
        ComponentDescriptor((1, 0), ("refl", "refl")),
    )
    u1cube = (U(1), U(1), U(1))
    specs = {
        "so2": GroupSpec.connected(SO(2), label="so2"),
        "so3": GroupSpec.connected(SO(3), label="so3"),
        "so5": GroupSpec.connected(SO(5), label="so5"),
        "so6": GroupSpec.connected(SO(6), label="so6"),
        "u1": GroupSpec.connected(U(1), label="u1"),
        "u3": GroupSpec.connected(U(3), label="u3"),
        "so3xso3": GroupSpec.connected(*so3sq, label="so3xso3"),
        "u1cube": GroupSpec.connected(*u1cube, label="u1cube"),
        "o6": GroupSpec((SO(6),), (ident1, refl1), "o6"),
        "o6minus": GroupSpec((SO(6),), (refl1,), "o6minus", require_identity=False),
        "x1": GroupSpec((SO(6),), (ident1, refl1), "x1"),
        "x2": GroupSpec.connected(SO(6), label="x2"),
        "x3": GroupSpec.connected(SO(5), label="x3"),
        "x4": GroupSpec((U(3),), (ident1, refl1), "x4"),
        "x5": GroupSpec(so3sq, rm_components, "x5"),
        "x6": GroupSpec(so3sq, rm_components_odd, "x6"),
        "x7": GroupSpec(u1cube, u1_components, "x7"),
    }
    return specs


def group_spec(label: str) -> GroupSpec:
    key = label.lower().strip()
    if key.endswith("-spec"):
        key = key[: -len("-spec")]
    specs = named_groups()
    if key not in specs:
        raise UnknownLabelError(f"unknown group label {label!r}; known: {', '.join(specs)}")
    return specs[key]
