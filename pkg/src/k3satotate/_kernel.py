"""Compiled inner loop for point counting over prime fields."""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def _eval_mod(coeffs, exps, x, y, z, p):
    acc = 0
    for t in range(coeffs.shape[0]):
        v = coeffs[t] % p
        for _ in range(exps[t, 0]):
            v = v * x % p
        for _ in range(exps[t, 1]):
            v = v * y % p
        for _ in range(exps[t, 2]):
            v = v * z % p
        acc = (acc + v) % p
    return acc


@numba.njit(cache=True, nogil=True)
def chart_character_sum(coeffs, exps, p, chi, y_start, y_stop):
    """``sum_{y_start <= y < y_stop} sum_{z in F_p} chi(f(1, y, z))``.

    For each ``y`` the values ``f(1, y, z)``, ``z = 0, 1, ...``, come from the
    forward-difference table of a polynomial of degree <= 6 in ``z``.
    """
    total = 0
    d = np.zeros(7, dtype=np.int64)
    for y in range(y_start, y_stop):
        for z in range(7):
            d[z] = _eval_mod(coeffs, exps, 1, y, z, p)
        # difference table: d[k] becomes Delta^k g(0)
        for k in range(1, 7):
            for j in range(6, k - 1, -1):
                d[j] = (d[j] - d[j - 1]) % p
        d0, d1, d2, d3, d4, d5, d6 = d[0], d[1], d[2], d[3], d[4], d[5], d[6]
        s = 0
        for _ in range(p):
            s += chi[d0]
            # branchless "add then reduce mod p": subtract p, add it back if negative
            d0 += d1 - p
            d0 += p & (d0 >> 63)
            d1 += d2 - p
            d1 += p & (d1 >> 63)
            d2 += d3 - p
            d2 += p & (d2 >> 63)
            d3 += d4 - p
            d3 += p & (d3 >> 63)
            d4 += d5 - p
            d4 += p & (d4 >> 63)
            d5 += d6 - p
            d5 += p & (d5 >> 63)
        total += s
    return total


@numba.njit(cache=True, nogil=True)
def line_character_sum(coeffs, exps, p, chi):
    """``sum_z chi(f(0, 1, z)) + chi(f(0, 0, 1))``."""
    s = 0
    for z in range(p):
        s += chi[_eval_mod(coeffs, exps, 0, 1, z, p)]
    s += chi[_eval_mod(coeffs, exps, 0, 0, 1, p)]
    return s
