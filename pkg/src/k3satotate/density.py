"""Trace densities: level-set integration over the torus, moment-matched splines, mixtures.

Every torus handled here has a separable trace ``c + 2 cos(phi_1) + ... +
2 cos(phi_d)``.  Folding the Weyl weight over the sign flips ``phi_i -> -phi_i``
reduces the integrals to the cube ``[0, pi]^d``, on which the last angle of a
level set is ``arccos`` of the remaining ones.  The inverse square-root blow-up
where the level set meets a face of the cube is removed by the substitution
``phi = mid - half * cos(tau)`` before any quadrature.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence, Union

import numpy as np
from scipy.interpolate import PPoly
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .errors import ConditioningError, DomainError
from .laurent import LaurentPoly
from .liegroups import (
    ATOM,
    FULL,
    MIRRORED,
    SO_EVEN,
    TWISTED,
    UNITARY,
    ConnectedBlock,
    GroupSpec,
    MomentSequence,
    coset_trace_poly,
    coset_weight,
    product_torus,
)
from .quadrature import adaptive, gauss_legendre, gl_cos_nodes

DEFAULT_GRID = 601
DEFAULT_PIECES = 25
DEFAULT_SPLINE_K = 35
DENSITY_TOL = 1e-6
SPLINE_K_RANGE = (20, 35)
MAX_CONDITION = 1e13
UNDERSHOOT_TOLERANCE = 1e-3
# groups whose density is not C^2, so moment-matched splines oscillate
SPLINE_UNRELIABLE = frozenset({"u1cube"})

_INNER_NODES = 48


@dataclass(frozen=True)
class TwistedCoset:
    """The reflection coset ``O(2m) \\ SO(2m)`` of an even orthogonal block."""

    block: ConnectedBlock

    def __post_init__(self):
        if self.block.kind != SO_EVEN or self.block.rank < 2:
            raise DomainError(f"no twisted coset model for {self.block}")

    @property
    def trace_range(self) -> tuple[int, int]:
        n = self.block.rank - 1
        return -2 * n, 2 * n


Target = Union[ConnectedBlock, Sequence[ConnectedBlock], TwistedCoset]


# ---------------------------------------------------------------------------
# torus models


@dataclass(frozen=True)
class _Torus:
    """Folded weight ``sum_t coeffs[t] * prod_i cos(exps[t, i] * phi_i)`` on ``[0, pi]^d``."""

    d: int
    offset: int
    exps: np.ndarray  # (terms, d), nonnegative ints
    coeffs: np.ndarray  # (terms,)
    scale: float  # 1 / (CT(w) * (2 pi)^d)

    def _cos_products(self, phi: np.ndarray, upto: int) -> np.ndarray:
        out = None
        for i in range(upto):
            ks, idx = np.unique(self.exps[:, i], return_inverse=True)
            c = np.cos(phi[..., i, None] * ks)[..., idx]
            out = c if out is None else out * c
        if out is None:
            out = np.ones(phi.shape[:-1] + (len(self.coeffs),))
        return out

    def weight(self, phi: np.ndarray) -> np.ndarray:
        """Folded weight at angles of shape ``(..., d)``."""
        return self._cos_products(phi, self.d) @ self.coeffs

    def weight_tail(self, head: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        """``int_alpha^pi`` of the folded weight in the last angle.

        ``head`` holds the first ``d - 1`` angles, shape ``(..., d - 1)``.
        """
        alpha = np.asarray(alpha, dtype=float)
        head = np.broadcast_to(head, alpha.shape + (self.d - 1,))
        lead = self._cos_products(head, self.d - 1)
        ks, idx = np.unique(self.exps[:, -1], return_inverse=True)
        safe = np.where(ks == 0, 1.0, ks)
        al = alpha[..., None]
        last = np.where(ks == 0, np.pi - al, -np.sin(ks * al) / safe)[..., idx]
        return (lead * last) @ self.coeffs


def _split_trace(tr: LaurentPoly) -> int:
    """Check that ``tr = c + sum (z_i + 1/z_i)`` and return ``c``."""
    d = tr.nvars
    expected = {}
    for i in range(d):
        for s in (1, -1):
            e = [0] * d
            e[i] = s
            expected[tuple(e)] = 1
    c = tr.constant_term()
    rest = {e: v for e, v in tr.terms.items() if any(e)}
    if rest != expected:
        raise DomainError("trace is not separable on this torus")
    return int(c)


def _fold(w: LaurentPoly) -> dict[tuple[int, ...], float]:
    """Sum of ``w`` over all sign flips, as coefficients of ``prod cos(|e_i| phi_i)``.

    Averaging ``cos(e . phi)`` over the flips gives ``prod_i cos(e_i phi_i)``.
    """
    out: dict[tuple[int, ...], float] = {}
    for e, c in w.terms.items():
        key = tuple(abs(a) for a in e)
        out[key] = out.get(key, 0.0) + float(c) * 2**w.nvars
    return {e: c for e, c in out.items() if c}


@lru_cache(maxsize=None)
def _torus_model(target) -> _Torus:
    if isinstance(target, TwistedCoset):
        m = target.block.rank
        tr, w = coset_trace_poly(m), coset_weight(m)
    else:
        blocks = (target,) if isinstance(target, ConnectedBlock) else tuple(target)
        tr, w, _ = product_torus(blocks)
    d = tr.nvars
    if d > 3:
        raise DomainError(f"torus rank {d} > 3 is not supported")
    offset = _split_trace(tr)
    folded = _fold(w)
    exps = np.array(list(folded), dtype=float).reshape(-1, d)
    coeffs = np.array(list(folded.values()))
    scale = 1.0 / (float(w.constant_term()) * (2 * np.pi) ** d)
    return _Torus(d, offset, exps, coeffs, scale)


def _key(target: Target):
    if isinstance(target, (ConnectedBlock, TwistedCoset)):
        return target
    return tuple(target)


def target_range(target: Target) -> tuple[int, int]:
    if isinstance(target, (ConnectedBlock, TwistedCoset)):
        return target.trace_range
    lo = sum(b.trace_range[0] for b in target)
    hi = sum(b.trace_range[1] for b in target)
    return lo, hi


# ---------------------------------------------------------------------------
# level-set density


def _last_angle(s, dlo, dhi, lo, hi):
    """``sin`` and value of ``phi_d = arccos(s - cos(phi))`` without cancellation.

    ``phi = lo + dlo = hi - dhi`` ranges over ``[lo, hi]`` with
    ``cos(lo) = min(1, s + 1)`` and ``cos(hi) = max(-1, s - 1)``.
    """
    phi = lo + dlo
    # 1 + c and 1 - c with c = s - cos(phi)
    p = (s + 1 - np.minimum(1.0, s + 1)) + 2 * np.sin((phi + lo) / 2) * np.sin(dlo / 2)
    m = (np.maximum(-1.0, s - 1) - s + 1) + 2 * np.sin((hi + phi) / 2) * np.sin(dhi / 2)
    p = np.maximum(p, 0.0)
    m = np.maximum(m, 0.0)
    sine = np.sqrt(p * m)
    return sine, np.arctan2(sine, (p - m) / 2)


def _angle_range(s):
    lo = np.arccos(np.minimum(1.0, s + 1))
    hi = np.arccos(np.maximum(-1.0, s - 1))
    return lo, hi


def _density_1(model: _Torus, s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    phi = np.arccos(s[inside])
    w = model.weight(phi[:, None])
    out[inside] = model.scale * w / (2 * np.sin(phi))
    return out


def _density_2(model: _Torus, s: float, tol: float) -> float:
    lo, hi = _angle_range(s)
    half = (hi - lo) / 2

    def f(tau):
        dlo = half * (1 - np.cos(tau))
        dhi = half * (1 + np.cos(tau))
        sine, last = _last_angle(s, dlo, dhi, lo, hi)
        phi = np.stack([lo + dlo, last], axis=-1)
        val = model.weight(phi) * half * np.sin(tau)
        return np.where(sine > 0, val / (2 * np.where(sine > 0, sine, 1.0)), 0.0)

    total, _ = adaptive(f, 0.0, np.pi, tol / model.scale)
    return model.scale * total


def _curve_integral(model: _Torus, head: np.ndarray, r: np.ndarray, n: int = _INNER_NODES) -> np.ndarray:
    """For each row of ``head`` (fixed leading angles), integrate along the curve
    ``cos(phi_{d-1}) + cos(phi_d) = r`` with the level-set measure ``dphi_{d-1} / (2 sin phi_d)``.
    """
    lo, hi = _angle_range(r)
    t, w = gauss_legendre(n)
    tau = (t + 1) * (np.pi / 2)
    half = ((hi - lo) / 2)[:, None]
    dlo = half * (1 - np.cos(tau))
    dhi = half * (1 + np.cos(tau))
    sine, last = _last_angle(r[:, None], dlo, dhi, lo[:, None], hi[:, None])
    phi_mid = lo[:, None] + dlo
    k = head.shape[-1]
    phi = np.empty(phi_mid.shape + (k + 2,))
    phi[..., :k] = head[:, None, :]
    phi[..., k] = phi_mid
    phi[..., k + 1] = last
    weights = w * (np.pi / 2) * half * np.sin(tau)
    val = model.weight(phi) * weights
    good = sine > 0
    val = np.where(good, val / (2 * np.where(good, sine, 1.0)), 0.0)
    return val.sum(axis=-1)


def _density_3(model: _Torus, s: float, tol: float) -> float:
    a = np.arccos(min(1.0, s + 2))
    b = np.arccos(max(-1.0, s - 2))
    cuts = [a, b]
    if -1 < s < 1:
        cuts.insert(1, np.arccos(s))
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        half = (hi - lo) / 2

        def f(tau, lo=lo, half=half):
            phi1 = lo + half * (1 - np.cos(tau))
            r = s - np.cos(phi1)
            return _curve_integral(model, phi1[:, None], r) * half * np.sin(tau)

        piece, _ = adaptive(f, 0.0, np.pi, tol / model.scale / 2)
        total += piece
    return model.scale * total


def _model_density(model: _Torus, xs: np.ndarray, tol: float) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    s = (xs - model.offset) / 2
    if model.d == 1:
        return _density_1(model, s)
    out = np.zeros_like(s)
    fn = _density_2 if model.d == 2 else _density_3
    for i, si in np.ndenumerate(s):
        if abs(si) < model.d:
            out[i] = fn(model, float(si), tol)
    return np.maximum(out, 0.0)


def levelset_density(target: Target, xs, tol: float = DENSITY_TOL) -> np.ndarray:
    """Density of the trace on a connected block, block product or twisted coset.

    Values at ``x`` outside the open support are 0.  For a torus of dimension
    one the density is infinite on the exceptional set ``c + 2Z`` inside the
    support; such points are also reported as 0 by the closed form's guard.
    """
    model = _torus_model(_key(target))
    return _model_density(model, np.asarray(xs, dtype=float), tol / 4)


# ---------------------------------------------------------------------------
# level-set CDF


def _cdf_1(model: _Torus, s: np.ndarray) -> np.ndarray:
    alpha = np.arccos(np.clip(s, -1, 1))
    return model.scale * model.weight_tail(np.zeros(s.shape + (0,)), alpha)


def _tail_pieces(u_center):
    """Breakpoints of ``phi -> arccos(clip(u_center - cos(phi), -1, 1))`` on ``[0, pi]``."""
    pts = [0.0, np.pi]
    for v in (u_center - 1, u_center + 1):
        if -1 < v < 1:
            pts.append(float(np.arccos(v)))
    return sorted(pts)


def _cdf_2(model: _Torus, s: float, tol: float) -> float:
    total = 0.0
    cuts = _tail_pieces(s)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        half = (hi - lo) / 2

        def f(tau, lo=lo, half=half):
            phi1 = lo + half * (1 - np.cos(tau))
            alpha = np.arccos(np.clip(s - np.cos(phi1), -1, 1))
            return model.weight_tail(phi1[:, None], alpha) * half * np.sin(tau)

        piece, _ = adaptive(f, 0.0, np.pi, tol / model.scale / 3)
        total += piece
    return model.scale * total


def _slice_tail(model: _Torus, phi1: np.ndarray, r: np.ndarray, n: int = _INNER_NODES) -> np.ndarray:
    """``int_0^pi dphi2 int_{cos phi3 <= r - cos phi2} W dphi3`` for each ``(phi1, r)``."""
    out = np.zeros_like(r)
    x, w = gl_cos_nodes(0.0, 1.0, n)
    a = np.arccos(np.clip(r + 1, -1, 1))
    b = np.arccos(np.clip(r - 1, -1, 1))
    for lo, hi in ((np.zeros_like(r), a), (a, b), (b, np.full_like(r, np.pi))):
        width = hi - lo
        phi2 = lo[:, None] + width[:, None] * x
        wt = width[:, None] * w
        alpha = np.arccos(np.clip(r[:, None] - np.cos(phi2), -1, 1))
        head = np.stack([np.broadcast_to(phi1[:, None], phi2.shape), phi2], axis=-1)
        out += (model.weight_tail(head, alpha) * wt).sum(axis=-1)
    return out


def _cdf_3(model: _Torus, s: float, tol: float) -> float:
    pts = [0.0, np.pi]
    for v in (s - 2, s, s + 2):
        if -1 < v < 1:
            pts.append(float(np.arccos(v)))
    cuts = sorted(pts)
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        half = (hi - lo) / 2

        def f(tau, lo=lo, half=half):
            phi1 = lo + half * (1 - np.cos(tau))
            return _slice_tail(model, phi1, s - np.cos(phi1)) * half * np.sin(tau)

        piece, _ = adaptive(f, 0.0, np.pi, tol / model.scale / 4)
        total += piece
    return model.scale * total


@lru_cache(maxsize=1 << 16)
def _cdf_point(key, s: float, tol: float) -> float:
    # comparisons evaluate the same data points for left and right limits
    # and again for each jump-character part
    model = _torus_model(key)
    return (_cdf_2 if model.d == 2 else _cdf_3)(model, s, tol)


def levelset_cdf(target: Target, xs, tol: float = 1e-9) -> np.ndarray:
    """``P(trace <= x)`` on a connected block, block product or twisted coset."""
    model = _torus_model(_key(target))
    xs = np.asarray(xs, dtype=float)
    s = (xs - model.offset) / 2
    if model.d == 1:
        out = _cdf_1(model, s)
    else:
        out = np.zeros_like(s)
        key = _key(target)
        for i, si in np.ndenumerate(s):
            if si <= -model.d:
                out[i] = 0.0
            elif si >= model.d:
                out[i] = 1.0
            else:
                out[i] = _cdf_point(key, float(si), tol)
    out = np.where(s <= -model.d, 0.0, np.where(s >= model.d, 1.0, out))
    return np.clip(out, 0.0, 1.0)


# ---------------------------------------------------------------------------
# moment-matched splines


@dataclass(frozen=True)
class SplineDensity:
    """Natural cubic spline on a uniform subdivision with prescribed moments.

    ``coefficients[i]`` are the power-basis coefficients of piece ``i`` in
    ``(x - breakpoints[i])``, lowest degree first.
    """

    support: tuple[float, float]
    breakpoints: np.ndarray
    coefficients: np.ndarray
    moment_count: int
    exact: bool
    residual: float
    reliable: bool = True
    label: str = ""

    @property
    def pieces(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def _ppoly(self) -> PPoly:
        return PPoly(self.coefficients[:, ::-1].T.copy(), self.breakpoints, extrapolate=False)

    def __call__(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        out = np.nan_to_num(self._ppoly(xs), nan=0.0)
        return np.where((xs < self.support[0]) | (xs > self.support[1]), 0.0, out)

    def cdf(self, xs) -> np.ndarray:
        a, b = self.support
        xs = np.clip(np.asarray(xs, dtype=float), a, b)
        return self._ppoly.antiderivative()(xs)

    def moment(self, n: int) -> float:
        """``int x^n s(x) dx`` by Gauss-Legendre, exact for the piecewise polynomial."""
        t, w = np.polynomial.legendre.leggauss((n + 3) // 2 + 2)
        total = 0.0
        for lo, hi in zip(self.breakpoints[:-1], self.breakpoints[1:]):
            x = (lo + hi) / 2 + (hi - lo) / 2 * t
            total += (hi - lo) / 2 * np.dot(w, x**n * self(x))
        return total

    def undershoot(self, samples: int = 4001) -> float:
        xs = np.linspace(*self.support, samples)
        return float(max(0.0, -self(xs).min()))


def _shifted_legendre(K: int) -> list[list[Fraction]]:
    """Rows ``n``: coefficients of ``P_n(2u - 1)`` in ``u^k``."""
    rows = []
    for n in range(K + 1):
        row = [Fraction(0)] * (K + 1)
        for k in range(n + 1):
            row[k] = Fraction((-1) ** (n + k) * comb(n, k) * comb(n + k, k))
        rows.append(row)
    return rows


def _solve_tridiagonal(rhs: list[Fraction]) -> list[Fraction]:
    """Solve ``M_{i-1} + 4 M_i + M_{i+1} = rhs_i`` with zero end values (Thomas)."""
    n = len(rhs)
    c, d = [Fraction(0)] * n, [Fraction(0)] * n
    for i in range(n):
        denom = 4 - (c[i - 1] if i else 0)
        c[i] = Fraction(1) / denom
        d[i] = (rhs[i] - (d[i - 1] if i else 0)) / denom
    out = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        out[i] = d[i] - (c[i] * out[i + 1] if i + 1 < n else 0)
    return out


@lru_cache(maxsize=None)
def _spline_basis(pieces: int) -> tuple:
    """Exact piece coefficients of the natural cardinal splines on ``[0, 1]``.

    Returns ``coef[j][i][k]``: basis ``j`` on piece ``i``, coefficient of
    ``(u - i/pieces)^k``.
    """
    P = pieces
    h = Fraction(1, P)
    basis = []
    for j in range(P + 1):
        y = [Fraction(int(i == j)) for i in range(P + 1)]
        rhs = [6 * (y[i - 1] - 2 * y[i] + y[i + 1]) / h**2 for i in range(1, P)]
        M = [Fraction(0)] + _solve_tridiagonal(rhs) + [Fraction(0)]
        pieces_j = []
        for i in range(P):
            b = (y[i + 1] - y[i]) / h - h * (2 * M[i] + M[i + 1]) / 6
            pieces_j.append((y[i], b, M[i] / 2, (M[i + 1] - M[i]) / (6 * h)))
        basis.append(tuple(pieces_j))
    return tuple(basis)


@lru_cache(maxsize=None)
def _moment_matrix(pieces: int, K: int) -> tuple:
    """``G[n][j] = int_0^1 u^n B_j(u) du`` exactly."""
    P = pieces
    basis = _spline_basis(P)
    # I[i][n][k] = int over piece i of u^n (u - u_i)^k
    I = []
    for i in range(P):
        t = Fraction(i, P)
        lo, hi = t, Fraction(i + 1, P)
        rows = []
        for n in range(K + 1):
            row = []
            for k in range(4):
                acc = Fraction(0)
                for l in range(k + 1):
                    e = n + l + 1
                    acc += comb(k, l) * (-t) ** (k - l) * (hi**e - lo**e) / e
                row.append(acc)
            rows.append(row)
        I.append(rows)
    G = []
    for n in range(K + 1):
        G.append(
            tuple(
                sum(basis[j][i][k] * I[i][n][k] for i in range(P) for k in range(4)) for j in range(P + 1)
            )
        )
    return tuple(G)


def _unit_moments(moments: Sequence[Fraction], a: Fraction, b: Fraction) -> list[Fraction]:
    """Moments of ``u = (x - a) / (b - a)``."""
    L = b - a
    out = []
    for n in range(len(moments)):
        acc = sum(comb(n, k) * moments[k] * (-a) ** (n - k) for k in range(n + 1))
        out.append(acc / L**n)
    return out


def spline_from_moments(
    moments: MomentSequence | Sequence[Fraction],
    support: tuple[float, float],
    pieces: int | None = None,
    label: str | None = None,
) -> SplineDensity:
    """Natural cubic spline on ``pieces`` uniform pieces matching ``m_0..m_K``.

    The unknowns are the ``pieces + 1`` knot values.  A square system is
    solved exactly over the rationals.  An overdetermined one is solved by
    least squares on the shifted Legendre moments weighted by ``2n + 1``, i.e.
    the spline minimises the L2 distance between its degree-``K`` polynomial
    projection and the target's.  ``pieces`` defaults to ``min(25, K)``.
    """
    values = [Fraction(v) for v in moments]
    if label is None:
        label = getattr(moments, "label", "")
    K = len(values) - 1
    if not SPLINE_K_RANGE[0] <= K <= SPLINE_K_RANGE[1]:
        raise DomainError(f"spline needs K in {SPLINE_K_RANGE[0]}..{SPLINE_K_RANGE[1]} moments, got {K}")
    if values[0] != 1:
        raise DomainError("moment sequence must start with m_0 = 1")
    if values[2] - values[1] ** 2 == 0:
        raise DomainError("zero variance: the moments describe an atom, not an absolutely continuous law")
    if pieces is None:
        pieces = min(DEFAULT_PIECES, K)
    if pieces < 1:
        raise DomainError("pieces must be positive")
    if pieces > K:
        raise ConditioningError(
            f"{pieces + 1} knot values but only {K + 1} moments: the system is underdetermined; "
            f"reduce pieces to at most {K}"
        )
    a, b = Fraction(support[0]), Fraction(support[1])
    if not b > a:
        raise DomainError(f"empty support {support}")
    mu = _unit_moments(values, a, b)
    G = _moment_matrix(pieces, K)
    Leg = _shifted_legendre(K)
    A = [[sum(Leg[n][k] * G[k][j] for k in range(n + 1)) for j in range(pieces + 1)] for n in range(K + 1)]
    rhs = [sum(Leg[n][k] * mu[k] for k in range(n + 1)) for n in range(K + 1)]
    scale = np.sqrt(2 * np.arange(K + 1) + 1.0)
    Af = np.array([[float(v) for v in row] for row in A]) * scale[:, None]
    tf = np.array([float(v) for v in rhs]) * scale
    cond = np.linalg.cond(Af)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise ConditioningError(f"moment system condition number {cond:.3g}; reduce pieces")
    exact = pieces == K
    if exact:
        dm = DomainMatrix([[QQ(v.numerator, v.denominator) for v in row] for row in A], (K + 1, K + 1), QQ)
        dr = DomainMatrix([[QQ(v.numerator, v.denominator)] for v in rhs], (K + 1, 1), QQ)
        try:
            sol = dm.lu_solve(dr).to_Matrix()
        except Exception as exc:  # singular over QQ
            raise ConditioningError(f"singular moment system ({exc}); reduce pieces") from exc
        y = np.array([float(v) for v in sol])
        residual = 0.0
    else:
        y, *_ = np.linalg.lstsq(Af, tf, rcond=None)
        residual = float(np.linalg.norm(Af @ y - tf))
    basis = _spline_basis(pieces)
    coef_u = np.array([[[float(c) for c in basis[j][i]] for i in range(pieces)] for j in range(pieces + 1)])
    coef_u = np.einsum("j,jik->ik", y, coef_u)
    L = float(b - a)
    coef_x = coef_u / L ** (np.arange(4) + 1)
    breaks = float(a) + L * np.arange(pieces + 1) / pieces
    return SplineDensity(
        (float(a), float(b)),
        breaks,
        coef_x,
        K,
        exact,
        residual,
        reliable=label not in SPLINE_UNRELIABLE,
        label=label,
    )


# ---------------------------------------------------------------------------
# supports and mixtures


def _component_target(spec: GroupSpec, kind: str):
    if kind == TWISTED:
        return TwistedCoset(spec.blocks[0])
    return tuple(spec.blocks)


def trace_support(spec: GroupSpec) -> tuple[float, float]:
    """Extremal traces over all non-atom components; ``(0, 0)`` if there are none."""
    lo, hi = [], []
    for kind in set(spec.classifications):
        if kind == ATOM:
            continue
        a, b = target_range(_component_target(spec, kind))
        if kind == MIRRORED:
            a, b = -b, -a
        lo.append(a)
        hi.append(b)
    if not lo:
        return 0.0, 0.0
    return float(min(lo)), float(max(hi))


def default_grid(spec: GroupSpec, points: int = DEFAULT_GRID) -> np.ndarray:
    return np.linspace(*trace_support(spec), points)


@dataclass
class DensityCurve:
    """Density samples on a grid plus atoms; ``cell_mass[i]`` is the continuous mass of
    ``[grid[i], grid[i+1]]`` computed from the exact CDF, which stays accurate where
    the density blows up at the edge of its support."""

    support: tuple[float, float]
    grid: np.ndarray
    values: np.ndarray
    atoms: list[tuple[float, float]] = field(default_factory=list)
    cell_mass: np.ndarray | None = None
    method: str = "levelset"
    undershoot: float = 0.0
    reliable: bool = True
    label: str = ""

    def continuous_mass(self) -> float:
        if self.cell_mass is not None:
            return float(np.sum(self.cell_mass))
        return float(np.trapezoid(self.values, self.grid))

    def total_mass(self) -> float:
        return self.continuous_mass() + sum(m for _, m in self.atoms)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "density"])
        for x, v in zip(self.grid, self.values):
            w.writerow([f"{x:.10g}", f"{v:.12g}"])
        for loc, mass in self.atoms:
            w.writerow(["atom", f"{loc:.10g}", f"{mass:.12g}"])
        return buf.getvalue()


def spline_reliable(spec: GroupSpec) -> bool:
    """False for ``[U1]^3`` neutral components, whose density is not C^2."""
    u1cube = len(spec.blocks) == 3 and all(b.kind == UNITARY and b.rank == 1 for b in spec.blocks)
    return not u1cube and spec.label not in SPLINE_UNRELIABLE


def _component_spline(spec: GroupSpec, kind: str, K: int, pieces: int | None) -> SplineDensity:
    from .liegroups import component_moments

    base = FULL if kind == MIRRORED else kind
    m = component_moments(spec, base, K)
    target = _component_target(spec, base)
    return spline_from_moments(m, target_range(target), pieces, label=spec.label)


def mixture_density(
    spec: GroupSpec,
    xs=None,
    method: str = "levelset",
    K: int = DEFAULT_SPLINE_K,
    pieces: int | None = None,
) -> DensityCurve:
    """Equal-weight mixture of the component trace laws on the grid ``xs``."""
    if method not in ("levelset", "spline"):
        raise DomainError(f"unknown density method {method!r}")
    xs = default_grid(spec) if xs is None else np.asarray(xs, dtype=float)
    if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise DomainError("grid must be strictly increasing with at least two points")
    values = np.zeros_like(xs)
    cdf = np.zeros_like(xs)
    undershoot = 0.0
    kinds = spec.classifications
    for kind in sorted(set(kinds)):
        if kind == ATOM:
            continue
        weight = kinds.count(kind) / len(kinds)
        sign = -1.0 if kind == MIRRORED else 1.0
        pts = sign * xs
        if method == "levelset":
            target = _component_target(spec, FULL if kind == MIRRORED else kind)
            dens = levelset_density(target, pts)
            cum = levelset_cdf(target, pts)
        else:
            spl = _component_spline(spec, kind, K, pieces)
            dens = spl(pts)
            cum = spl.cdf(pts)
            undershoot = max(undershoot, spl.undershoot())
        if sign < 0:
            cum = 1.0 - cum
        values += weight * dens
        cdf += weight * cum
    atom = float(spec.atom_mass)
    atoms = [(0.0, atom)] if atom else []
    if method == "levelset":
        values = np.maximum(values, 0.0)
    reliable = method == "levelset" or spline_reliable(spec)
    return DensityCurve(
        trace_support(spec),
        xs,
        values,
        atoms,
        cell_mass=np.diff(cdf),
        method=method,
        undershoot=undershoot,
        reliable=reliable,
        label=spec.label,
    )


def mixture_cdf(spec: GroupSpec, xs, left: bool = False) -> np.ndarray:
    """Mixture CDF ``P(T <= x)`` (or ``P(T < x)`` with ``left``), atoms included."""
    xs = np.asarray(xs, dtype=float)
    kinds = spec.classifications
    out = np.zeros_like(xs)
    for kind in sorted(set(kinds)):
        weight = kinds.count(kind) / len(kinds)
        if kind == ATOM:
            out += weight * ((xs > 0) if left else (xs >= 0))
            continue
        target = _component_target(spec, FULL if kind == MIRRORED else kind)
        if kind == MIRRORED:
            out += weight * (1.0 - levelset_cdf(target, -xs))
        else:
            out += weight * levelset_cdf(target, xs)
    return out
