"""Command-line front end.

Every CSV written here starts with ``# key=value`` lines echoing the run
configuration and library versions.  Those lines are a function of the
configuration alone, so identical runs give byte-identical files; wall time
goes to a ``<out>.provenance.json`` sidecar (or stderr without ``--out``).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .counting import CountCache, power_sum_check, scan, surface, traces_csv
from .density import DEFAULT_GRID, DEFAULT_SPLINE_K, mixture_density, spline_reliable
from .errors import ConfigurationError, K3STError, MethodUnsupportedError
from .liegroups import group_spec, mixture_moments
from .stats import HIST_BINS, HIST_BOUND, build_histogram, compare, null_cdf_distances

COMMANDS = ("moments", "density", "scan", "traces", "hist", "compare", "powersums")
DEFAULT_PMAX = 10_000
NULL_REPLICATES = 200


@dataclass
class RunConfig:
    command: str
    surface: str | None = None
    group: str | None = None
    pmax: int = DEFAULT_PMAX
    k: int | None = None
    grid: int = DEFAULT_GRID
    bins: int = HIST_BINS
    method: str = "levelset"
    cache: str | None = None
    out: str | None = None
    seed: int | None = None
    threads: int = 1
    prime: int | None = None

    def header(self) -> str:
        import numba
        import scipy
        import sympy

        items = {k: v for k, v in asdict(self).items() if k != "out"}
        items["version"] = __version__
        items["numpy"] = np.__version__
        items["scipy"] = scipy.__version__
        items["sympy"] = sympy.__version__
        items["numba"] = numba.__version__
        return "".join(f"# {k}={v}\n" for k, v in items.items())


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="k3satotate", description="Sato-Tate trace statistics for K3 surfaces")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("label", nargs="?", help="group label (moments, density) or surface id")
    ap.add_argument("--config", help="JSON file of defaults; command-line flags win")
    # flags default to None so that only the ones actually given override the config
    ap.add_argument("--surface")
    ap.add_argument("--group")
    ap.add_argument("--pmax", type=int)
    ap.add_argument("--k", type=int)
    ap.add_argument("--grid", type=int)
    ap.add_argument("--bins", type=int)
    ap.add_argument("--method", choices=("levelset", "spline"))
    ap.add_argument("--cache")
    ap.add_argument("--out")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--prime", type=int, help="prime for powersums")
    return ap


def build_config(argv: list[str]) -> RunConfig:
    """Defaults, then the ``--config`` file, then explicit flags."""
    ns = _parser().parse_args(argv)
    known = {f.name for f in fields(RunConfig)}
    values: dict = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {ns.config}: {exc}") from exc
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(data)
    for name in known - {"command"}:
        v = getattr(ns, name, None)
        if v is not None:
            values[name] = v
    if ns.label is not None:
        if ns.command in ("moments", "density"):
            values["group"] = ns.label
        else:
            values["surface"] = ns.label
    values["command"] = ns.command
    return RunConfig(**values)


def _need(cfg: RunConfig, name: str):
    v = getattr(cfg, name)
    if v is None:
        raise ConfigurationError(f"{cfg.command} needs --{name}")
    return v


def _cache_path(cfg: RunConfig) -> str:
    return cfg.cache or os.path.join(".scan-cache", f"{cfg.surface}.txt")


def _records(cfg: RunConfig):
    s = surface(_need(cfg, "surface"))
    path = _cache_path(cfg)
    if not os.path.exists(path):
        raise ConfigurationError(f"no scan cache at {path}; run 'scan' first")
    cache = CountCache.load(path, s.id)
    if cache.pmax < cfg.pmax:
        raise ConfigurationError(f"cache {path} covers p <= {cache.pmax}, asked for {cfg.pmax}")
    return s, cache.traces(s, cfg.pmax)


def cmd_moments(cfg: RunConfig) -> str:
    spec = group_spec(_need(cfg, "group"))
    K = 10 if cfg.k is None else cfg.k
    return mixture_moments(spec, K).to_csv()


def cmd_density(cfg: RunConfig) -> str:
    spec = group_spec(_need(cfg, "group"))
    if cfg.method == "spline" and not spline_reliable(spec):
        raise MethodUnsupportedError(
            f"{spec.label}: density is not C^2, so moment-matched cubic splines oscillate; use --method levelset"
        )
    curve = mixture_density(
        spec,
        np.linspace(*_grid_range(spec), cfg.grid),
        method=cfg.method,
        K=DEFAULT_SPLINE_K if cfg.k is None else cfg.k,
    )
    return curve.to_csv()


def _grid_range(spec):
    from .density import trace_support

    lo, hi = trace_support(spec)
    if lo == hi:
        raise ConfigurationError(f"{spec.label} is a point mass; there is no density to tabulate")
    return lo, hi


def cmd_scan(cfg: RunConfig) -> str:
    s = surface(_need(cfg, "surface"))

    def progress(done, total):
        if done % 100 == 0 or done == total:
            print(f"{s.id}: {done}/{total} primes", file=sys.stderr)

    cache = scan(s, cfg.pmax, _cache_path(cfg), threads=cfg.threads, progress=progress)
    return traces_csv(cache.traces(s, cfg.pmax))


def cmd_traces(cfg: RunConfig) -> str:
    _, records = _records(cfg)
    return traces_csv(records)


def cmd_hist(cfg: RunConfig) -> str:
    _, records = _records(cfg)
    return build_histogram([r.trace for r in records], cfg.bins, HIST_BOUND).to_csv()


def cmd_compare(cfg: RunConfig) -> str:
    s, records = _records(cfg)
    spec = group_spec(cfg.group) if cfg.group else None
    report = compare(s, records, spec, K=6 if cfg.k is None else cfg.k)
    text = report.to_text()
    if cfg.seed is not None:
        null = null_cdf_distances(spec or group_spec(s.group), report.size, cfg.seed, NULL_REPLICATES)
        q50, q95 = np.quantile(null, [0.5, 0.95])
        text += f"cdf_distance_null,median={q50:.6f},q95={q95:.6f},replicates={NULL_REPLICATES}\n"
    return text


def cmd_powersums(cfg: RunConfig) -> str:
    s = surface(_need(cfg, "surface"))
    p = _need(cfg, "prime")
    kmax = 2 if cfg.k is None else cfg.k
    sums = power_sum_check(s, p, kmax)
    lines = ["k,trace_num,trace_den"]
    lines += [f"{k},{t.numerator},{t.denominator}" for k, t in enumerate(sums, start=1)]
    return "\n".join(lines) + "\n"


HANDLERS = {
    "moments": cmd_moments,
    "density": cmd_density,
    "scan": cmd_scan,
    "traces": cmd_traces,
    "hist": cmd_hist,
    "compare": cmd_compare,
    "powersums": cmd_powersums,
}


def run(cfg: RunConfig) -> str:
    """Output of one command, provenance header included."""
    return cfg.header() + HANDLERS[cfg.command](cfg)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = build_config(argv)
        start = time.perf_counter()
        text = run(cfg)
        wall = time.perf_counter() - start
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text)
            with open(cfg.out + ".provenance.json", "w") as fh:
                json.dump({"config": asdict(cfg), "version": __version__, "wall_seconds": wall}, fh, indent=1)
        else:
            sys.stdout.write(text)
            print(f"# wall_seconds={wall:.3f}", file=sys.stderr)
    except K3STError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
