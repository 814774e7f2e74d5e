"""Sparse multivariate Laurent polynomials with exact coefficients."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

Exponent = tuple[int, ...]


class LaurentPoly:
    """Polynomial in ``z_1^{±1}, ..., z_m^{±1}`` stored as ``{exponent: coeff}``.

    Coefficients are Python ints or Fractions; zero coefficients are never
    stored.  Instances are treated as immutable once built.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Exponent, int | Fraction] | None = None):
        self.nvars = nvars
        self.terms: dict[Exponent, int | Fraction] = {}
        if terms:
            for e, c in terms.items():
                if len(e) != nvars:
                    raise ValueError(f"exponent {e} has wrong length for {nvars} variables")
                if c:
                    self.terms[tuple(e)] = c

    @classmethod
    def constant(cls, nvars: int, c: int | Fraction = 1) -> "LaurentPoly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def monomial(cls, nvars: int, exponent: Iterable[int], c: int | Fraction = 1) -> "LaurentPoly":
        return cls(nvars, {tuple(exponent): c})

    @classmethod
    def variable(cls, nvars: int, i: int, power: int = 1) -> "LaurentPoly":
        e = [0] * nvars
        e[i] = power
        return cls(nvars, {tuple(e): 1})

    def copy(self) -> "LaurentPoly":
        return LaurentPoly(self.nvars, self.terms)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LaurentPoly.constant(self.nvars, other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "LaurentPoly(0)"
        parts = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(
                f"z{i + 1}" if k == 1 else f"z{i + 1}^{k}" for i, k in enumerate(e) if k
            )
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return "LaurentPoly(" + " + ".join(parts) + ")"

    # -- ring operations ----------------------------------------------------
    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return LaurentPoly.constant(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return LaurentPoly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            if not other:
                return LaurentPoly(self.nvars)
            return LaurentPoly(self.nvars, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        out: dict[Exponent, int | Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentPoly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers of a Laurent polynomial are not supported")
        result = LaurentPoly.constant(self.nvars)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- queries --------------------------------------------------------------
    def constant_term(self) -> int | Fraction:
        return self.terms.get((0,) * self.nvars, 0)

    def coefficient(self, exponent: Iterable[int]) -> int | Fraction:
        return self.terms.get(tuple(exponent), 0)

    def inverted(self) -> "LaurentPoly":
        """Image under ``z_i -> 1/z_i``."""
        return LaurentPoly(self.nvars, {tuple(-a for a in e): c for e, c in self.terms.items()})

    def substitute_signs(self, signs: Iterable[int]) -> "LaurentPoly":
        """Image under ``z_i -> z_i^{s_i}`` for ``s_i`` in ``{+1, -1}``."""
        signs = tuple(signs)
        return LaurentPoly(
            self.nvars, {tuple(a * s for a, s in zip(e, signs)): c for e, c in self.terms.items()}
        )

    def max_abs_exponents(self) -> tuple[int, ...]:
        out = [0] * self.nvars
        for e in self.terms:
            for i, a in enumerate(e):
                out[i] = max(out[i], abs(a))
        return tuple(out)

    def coefficient_norm(self) -> int | Fraction:
        return sum(abs(c) for c in self.terms.values())

    def extend(self, nvars: int, offset: int) -> "LaurentPoly":
        """Embed into ``nvars`` variables, occupying slots ``offset..``."""
        pad_l, pad_r = (0,) * offset, (0,) * (nvars - offset - self.nvars)
        return LaurentPoly(nvars, {pad_l + e + pad_r: c for e, c in self.terms.items()})

    def on_torus(self, theta: np.ndarray) -> np.ndarray:
        """Real part of the value at ``z_j = exp(i theta_j)``; ``theta`` has shape (..., m).

        For polynomials invariant under ``z -> 1/z`` (every trace and weight
        here) this is the exact value.
        """
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape[:-1])
        for e, c in self.terms.items():
            out += float(c) * np.cos(theta @ np.asarray(e, dtype=float))
        return out
