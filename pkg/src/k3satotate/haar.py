"""Haar-random traces, used as an independent check on moments and densities."""

from __future__ import annotations

import numpy as np

from .liegroups import ATOM, FULL, TWISTED, UNITARY, ConnectedBlock, GroupSpec

_BATCH = 50_000


def haar_orthogonal(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """``count`` Haar-distributed matrices in ``O(n)``.

    QR of a Gaussian matrix, with the columns of ``Q`` rescaled by the signs of
    ``diag(R)`` so the result does not depend on the QR sign convention.
    """
    z = rng.standard_normal((count, n, n))
    q, r = np.linalg.qr(z)
    d = np.sign(np.diagonal(r, axis1=1, axis2=2))
    d[d == 0] = 1
    return q * d[:, None, :]


def haar_unitary(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    z = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    d = d / np.abs(d)
    return q * d[:, None, :]


def _orthogonal_with_det(rng, count, n, det):
    q = haar_orthogonal(rng, count, n)
    flip = np.sign(np.linalg.det(q)) != det
    q[flip, :, 0] *= -1
    return q


def block_traces(rng: np.random.Generator, block: ConnectedBlock, count: int, det: int = 1) -> np.ndarray:
    """Traces of Haar samples from a block (``det=-1``: the reflection coset)."""
    if block.kind == UNITARY:
        u = haar_unitary(rng, count, block.rank)
        return 2 * np.trace(u, axis1=1, axis2=2).real
    q = _orthogonal_with_det(rng, count, block.dimension, det)
    return np.trace(q, axis1=1, axis2=2)


def monte_carlo_traces(spec: GroupSpec, count: int, seed: int) -> np.ndarray:
    """``count`` traces of Haar-random elements of ``spec``, deterministic in ``seed``.

    The component is drawn uniformly; atom components contribute exact zeros.
    """
    if count < 1:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    kinds = spec.classifications
    which = rng.integers(len(kinds), size=count)
    out = np.zeros(count)
    for c, kind in enumerate(kinds):
        idx = np.flatnonzero(which == c)
        if kind == ATOM or idx.size == 0:
            continue
        for start in range(0, idx.size, _BATCH):
            part = idx[start : start + _BATCH]
            n = part.size
            if kind == TWISTED:
                out[part] = block_traces(rng, spec.blocks[0], n, det=-1)
                continue
            t = np.zeros(n)
            for b in spec.blocks:
                t += block_traces(rng, b, n)
            out[part] = t if kind == FULL else -t
    return out

