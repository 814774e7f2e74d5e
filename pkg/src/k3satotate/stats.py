"""Histograms and quantitative comparison of observed traces with a Sato-Tate prediction."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, fsum, lcm, sqrt
from typing import Sequence

import numpy as np

from .counting import SurfaceModel, TraceRecord
from .density import mixture_cdf, trace_support
from .errors import ConfigurationError, DomainError, SampleError, WeilBoundError
from .liegroups import GroupSpec, group_spec, mixture_moments
from .ntheory import kronecker

HIST_BOUND = 6
HIST_BINS = 300
MAX_EMPIRICAL_K = 10
MIN_SAMPLE = 30


@dataclass(frozen=True)
class Histogram:
    """Counts on ``[-bound, bound]`` in equal bins; the last bin is right-closed."""

    counts: np.ndarray
    bound: int = HIST_BOUND

    @property
    def bins(self) -> int:
        return len(self.counts)

    @property
    def size(self) -> int:
        return int(self.counts.sum())

    @property
    def width(self) -> Fraction:
        return Fraction(2 * self.bound, self.bins)

    def bin_left(self, b: int) -> Fraction:
        return -self.bound + b * self.width

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_left", "count", "frequency"])
        n = self.size
        for b, c in enumerate(self.counts.tolist()):
            w.writerow([f"{float(self.bin_left(b)):.4f}", c, f"{(c / n if n else 0.0):.8f}"])
        return buf.getvalue()


def bin_index(t: Fraction, bins: int = HIST_BINS, bound: int = HIST_BOUND) -> int:
    """Exact bin of ``t``: ``floor((t + bound) * bins / (2 bound))``, clamped at the top."""
    t = Fraction(t)
    if abs(t) > bound:
        raise WeilBoundError(f"trace {t} outside [-{bound}, {bound}]")
    return min(floor((t + bound) * bins / (2 * bound)), bins - 1)


def build_histogram(traces: Sequence[Fraction], bins: int = HIST_BINS, bound: int = HIST_BOUND) -> Histogram:
    counts = np.zeros(bins, dtype=np.int64)
    for t in traces:
        counts[bin_index(t, bins, bound)] += 1
    return Histogram(counts, bound)


@dataclass(frozen=True)
class MomentEstimate:
    n: int
    value: float
    se: float
    exact: Fraction


def exact_mean(values: Sequence[Fraction]) -> Fraction:
    """Mean of rationals over one common denominator.

    Adding Fractions one by one runs a gcd on ever larger integers; here the
    denominators are prime powers, so one lcm and one final reduction do.
    """
    den = lcm(*{v.denominator for v in values})
    num = sum(v.numerator * (den // v.denominator) for v in values)
    return Fraction(num, den * len(values))


def empirical_moments(traces: Sequence[Fraction], K: int) -> list[MomentEstimate]:
    """``mean(t^n)`` for ``n = 1..K`` with standard errors from the sample variance of ``t^n``."""
    if not 1 <= K <= MAX_EMPIRICAL_K:
        raise DomainError(f"K must be in 1..{MAX_EMPIRICAL_K}")
    N = len(traces)
    if N < MIN_SAMPLE:
        raise SampleError(f"need at least {MIN_SAMPLE} traces, got {N}")
    ts = [Fraction(t) for t in traces]
    out = []
    for n in range(1, K + 1):
        powers = [t**n for t in ts]
        mean = exact_mean(powers)
        m = float(mean)
        var = fsum((float(x) - m) ** 2 for x in powers) / (N - 1)
        out.append(MomentEstimate(n, m, sqrt(var / N), mean))
    return out


def spike_mass(traces: Sequence[Fraction]) -> tuple[int, float]:
    """Number and fraction of traces that are exactly zero."""
    zeros = sum(1 for t in traces if t == 0)
    return zeros, (zeros / len(traces) if traces else 0.0)


def _is_square(n: int) -> bool:
    return n > 0 and int(round(sqrt(n))) ** 2 == n


def cdf_distance(traces: Sequence[Fraction], spec: GroupSpec) -> float:
    """``sup_x |F_emp(x) - F(x)|`` against the mixture CDF, atoms included."""
    n = len(traces)
    if not n:
        raise SampleError("no traces")
    values, counts = np.unique(np.array([float(t) for t in traces]), return_counts=True)
    right = mixture_cdf(spec, values)
    left = mixture_cdf(spec, values, left=True)
    after = np.cumsum(counts) / n
    before = after - counts / n
    return float(max(np.max(np.abs(right - after)), np.max(np.abs(left - before))))


@dataclass
class ComparisonReport:
    surface: str
    spec: str
    size: int
    moments: list[MomentEstimate]
    theoretical: list[Fraction]
    zero_count: int
    spike_fraction: float
    atom_mass: Fraction
    cdf_distance: float
    parts: dict[int, "ComparisonReport"] = field(default_factory=dict)
    part_fractions: dict[int, float] = field(default_factory=dict)

    @property
    def z_scores(self) -> list[float]:
        out = []
        for est, th in zip(self.moments, self.theoretical):
            diff = est.value - float(th)
            if est.se == 0:
                out.append(0.0 if est.exact == th else float("inf") * np.sign(diff))
            else:
                out.append(diff / est.se)
        return out

    @property
    def max_abs_z(self) -> float:
        return max(abs(z) for z in self.z_scores)

    def to_text(self) -> str:
        lines = [
            f"surface {self.surface} vs {self.spec}: {self.size} traces",
            "n,empirical,se,theory,z",
        ]
        for est, th, z in zip(self.moments, self.theoretical, self.z_scores):
            lines.append(f"{est.n},{est.value:.6f},{est.se:.6f},{th},{z:.3f}")
        lines.append(f"spike,{self.zero_count},{self.spike_fraction:.6f},{self.atom_mass}")
        lines.append(f"cdf_distance,{self.cdf_distance:.6f}")
        for sign, part in sorted(self.parts.items(), reverse=True):
            lines.append(f"part {sign:+d} fraction {self.part_fractions[sign]:.4f}")
            lines.extend("  " + line for line in part.to_text().splitlines())
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SplitReport:
    discriminant: int
    parts: dict[int, list[TraceRecord]]

    @property
    def sizes(self) -> dict[int, int]:
        return {k: len(v) for k, v in self.parts.items()}

    @property
    def fractions(self) -> dict[int, float]:
        total = sum(self.sizes.values())
        return {k: v / total for k, v in self.sizes.items()}

    def moments(self, K: int) -> dict[int, list[MomentEstimate]]:
        return {k: empirical_moments([r.trace for r in v], K) for k, v in self.parts.items() if len(v) >= MIN_SAMPLE}


def component_split(s: SurfaceModel, records: Sequence[TraceRecord]) -> SplitReport:
    """Partition records by the jump character ``(Delta / p)``; one part if it is trivial."""
    D = s.jump
    if _is_square(D):
        return SplitReport(D, {1: list(records)})
    parts: dict[int, list[TraceRecord]] = {1: [], -1: []}
    for rec in records:
        parts[kronecker(D, rec.p)].append(rec)
    return SplitReport(D, parts)


def _check_spec(s: SurfaceModel, spec: GroupSpec, traces: Sequence[Fraction]):
    if spec.dimension != s.transcendental_rank:
        raise ConfigurationError(
            f"{spec.label} acts in dimension {spec.dimension}, but {s.id} has transcendental rank {s.transcendental_rank}"
        )
    lo, hi = trace_support(spec)
    has_atom = spec.atom_mass > 0
    for t in traces:
        if not (lo <= t <= hi or (has_atom and t == 0)):
            raise ConfigurationError(f"trace {t} of {s.id} lies outside the support [{lo}, {hi}] of {spec.label}")


def _report(s: SurfaceModel, traces: Sequence[Fraction], spec: GroupSpec, K: int) -> ComparisonReport:
    _check_spec(s, spec, traces)
    theory = list(mixture_moments(spec, K).values[1:])
    zeros, frac = spike_mass(traces)
    return ComparisonReport(
        s.id,
        spec.label,
        len(traces),
        empirical_moments(traces, K),
        theory,
        zeros,
        frac,
        spec.atom_mass,
        cdf_distance(traces, spec),
    )


def compare(
    s: SurfaceModel,
    records: Sequence[TraceRecord],
    spec: GroupSpec | None = None,
    K: int = 6,
    split: bool = True,
) -> ComparisonReport:
    """Moments, spike mass and CDF distance of the records against ``spec``.

    With a nontrivial jump character the records are also split by
    ``(Delta / p)`` and each part is compared with the components of the
    matching determinant.
    """
    spec = spec or group_spec(s.group)
    traces = [r.trace for r in records]
    report = _report(s, traces, spec, K)
    if split and not _is_square(s.jump):
        sp = component_split(s, records)
        report.part_fractions = sp.fractions
        for sign, recs in sp.parts.items():
            if len(recs) < MIN_SAMPLE:
                continue
            try:
                sub = spec.restrict(sign)
            except ValueError:
                continue
            report.parts[sign] = _report(s, [r.trace for r in recs], sub, K)
    return report


def null_cdf_distances(spec: GroupSpec, n: int, seed: int, replicates: int = 200, grid: int = 4001) -> np.ndarray:
    """Sup-CDF distances of ``replicates`` Haar samples of size ``n`` from ``spec``.

    Calibrates :func:`cdf_distance`: its typical size for ``n`` draws from the
    prediction itself.  The continuous part of the CDF is interpolated from a
    fine grid, which is accurate enough for a reference distribution; the atom
    is added exactly.
    """
    from .haar import monte_carlo_traces

    lo, hi = trace_support(spec)
    atom = float(spec.atom_mass)
    xs = np.linspace(min(lo, 0.0), max(hi, 0.0), grid)
    smooth = mixture_cdf(spec, xs) - atom * (xs >= 0)
    sample = monte_carlo_traces(spec, n * replicates, seed).reshape(replicates, n)
    out = np.empty(replicates)
    for i, row in enumerate(sample):
        values, counts = np.unique(row, return_counts=True)
        base = np.interp(values, xs, smooth)
        right = base + atom * (values >= 0)
        left = base + atom * (values > 0)
        after = np.cumsum(counts) / n
        before = after - counts / n
        out[i] = max(np.max(np.abs(right - after)), np.max(np.abs(left - before)))
    return out
