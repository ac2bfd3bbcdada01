"""Command-line interface: ``bellsim {chsh,hist,validate,dump}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, backend
from .core import MASK64, ConfigurationError, ModeIndex, Site
from .sampler import SamplerKind, check_pairs, sample_block
from .simulate import CHUNK_SIZE, chunk_ranges, run_chsh, run_histogram

DEFAULT_SEED = 2024
DEFAULT_SAMPLES = {"chsh": 2_000_000, "hist": 1_000_000, "validate": 200_000, "dump": 10}
DUMP_CAP = 10_000_000

CHSH_COLUMNS = [
    "theta", "delta_mean", "delta_stderr", "delta_imag_mean", "delta_theory",
    "c_ab", "c_ab_stderr", "c_apb", "c_apb_stderr",
    "c_abp", "c_abp_stderr", "c_apbp", "c_apbp_stderr",
]


@dataclass
class RunConfig:
    command: str
    seed: int = DEFAULT_SEED
    samples: int = 1
    pairs: int = 1
    sampler: str = "exact"
    theta_min: float = 0.0
    theta_max: float = math.pi / 2
    theta_steps: int = 25
    workers: int = 1
    output: str | None = None
    format: str = "csv"
    extra: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if not 0 <= self.seed <= MASK64:
            raise ConfigurationError("--seed must fit in 64 unsigned bits")
        check_pairs(self.pairs)
        SamplerKind(self.sampler)
        if self.samples < 1:
            raise ConfigurationError("--samples must be >= 1")
        if self.workers < 1:
            raise ConfigurationError("--workers must be >= 1")
        if self.theta_steps < 1:
            raise ConfigurationError("--theta-steps must be >= 1")
        if not (math.isfinite(self.theta_min) and math.isfinite(self.theta_max)):
            raise ConfigurationError("theta bounds must be finite")
        if self.theta_min > self.theta_max:
            raise ConfigurationError("--theta-min must not exceed --theta-max")
        if self.format not in ("csv", "json"):
            raise ConfigurationError("--format must be csv or json")
        return self

    def thetas(self) -> list[float]:
        if self.theta_steps == 1:
            return [self.theta_min]
        return [float(t) for t in np.linspace(self.theta_min, self.theta_max, self.theta_steps)]

    def manifest(self) -> dict:
        return {
            "tool": "bellsim",
            "version": __version__,
            "kernel": backend.NAME,
            "chunk_size": CHUNK_SIZE,
            "config": asdict(self),
        }


_ANGLE = re.compile(r"^\s*([+-]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_angle(text: str) -> float:
    """Radians, also accepting ``pi``, ``pi/8``, ``3pi/8``, ``-pi/8``."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _ANGLE.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}")
    signs = {"": 1.0, "+": 1.0, "-": -1.0}
    coef = signs[m.group(1)] if m.group(1) in signs else float(m.group(1))
    den = float(m.group(2)) if m.group(2) else 1.0
    return coef * math.pi / den


def parse_variable(text: str) -> dict:
    """``spin:SITE:THETA``, ``corr:THETA_A:THETA_B`` or ``number:MODE``."""
    parts = text.split(":")
    try:
        if parts[0] == "spin" and len(parts) == 3:
            return {"kind": "spin", "site": Site(parts[1].upper()).value, "theta": parse_angle(parts[2])}
        if parts[0] == "corr" and len(parts) == 3:
            return {"kind": "corr", "theta_a": parse_angle(parts[1]), "theta_b": parse_angle(parts[2])}
        if parts[0] == "number" and len(parts) == 2:
            labels = {m.label: int(m) for m in ModeIndex}
            mode = labels[parts[1]] if parts[1] in labels else int(parts[1])
            return {"kind": "number", "mode": int(ModeIndex(mode))}
    except (ValueError, KeyError, argparse.ArgumentTypeError) as exc:
        raise argparse.ArgumentTypeError(f"bad variable {text!r}: {exc}") from exc
    raise argparse.ArgumentTypeError(
        f"bad variable {text!r}; use spin:SITE:THETA, corr:THETA_A:THETA_B or number:MODE"
    )


def fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


# -- output -------------------------------------------------------------------------


def write_atomic(path: str | None, text: str) -> None:
    """Write to ``path`` via a temporary file and rename; ``None`` or ``-`` is stdout."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_table(columns, rows, manifest, fmt_name: str) -> str:
    if fmt_name == "json":
        payload = {"manifest": manifest, "columns": columns, "rows": rows}
        return json.dumps(payload, indent=2, allow_nan=True) + "\n"
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([v if isinstance(v, (int, str)) else fmt(v) for v in row])
    return buf.getvalue()


def emit(cfg: RunConfig, columns, rows) -> None:
    manifest = cfg.manifest()
    write_atomic(cfg.output, render_table(columns, rows, manifest, cfg.format))
    if cfg.format == "csv" and cfg.output not in (None, "-"):
        write_atomic(cfg.output + ".manifest.json", json.dumps(manifest, indent=2) + "\n")


# -- commands -----------------------------------------------------------------------


def cmd_chsh(cfg: RunConfig) -> int:
    points = run_chsh(cfg.seed, cfg.samples, cfg.thetas(), cfg.pairs, cfg.sampler, cfg.workers)
    rows = []
    for p in points:
        row = [p.theta, p.delta_mean, p.delta_stderr, p.delta_imag_mean, p.delta_theory]
        for c in p.correlations:
            row += [c.mean.real, c.stderr_real]
        rows.append(row)
    emit(cfg, CHSH_COLUMNS, rows)
    return 0


def cmd_hist(cfg: RunConfig) -> int:
    variables = cfg.extra["variables"]
    bins = tuple([cfg.extra["bins"]] * len(variables))
    ranges = tuple([tuple(cfg.extra["range"])] * len(variables))
    hist, stats, outside = run_histogram(
        cfg.seed, cfg.samples, variables, bins, ranges, cfg.pairs, cfg.sampler, cfg.workers
    )
    edges = hist.edges
    payload = {
        "manifest": cfg.manifest(),
        "variables": variables,
        "bin_edges_x": edges[0].tolist(),
        "bin_edges_y": edges[1].tolist() if len(edges) > 1 else None,
        "counts": hist.counts.tolist(),
        "overflow": hist.overflow,
        "flow_counts": hist.flow_counts(),
        "total": hist.total,
        "real_means": [s.mean.real for s in stats],
        "real_stderrs": [s.stderr_real for s in stats],
        "imag_means": [s.mean.imag for s in stats],
        "imag_stderrs": [s.stderr_imag for s in stats],
        "out_of_bounds_fraction": outside,
    }
    write_atomic(cfg.output, json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_validate(cfg: RunConfig) -> int:
    from .fock import SUM_DIFF_JACOBIAN
    from .validate import run_validation

    pairs = sorted({1, 2, cfg.pairs})
    checks = run_validation(
        cfg.seed,
        cfg.samples,
        pairs=pairs,
        jacobian=cfg.extra.get("jacobian", SUM_DIFF_JACOBIAN),
        z_tol=cfg.extra.get("z_tol", 4.0),
        workers=cfg.workers,
    )
    ok = all(c.passed for c in checks)
    report = {"manifest": cfg.manifest(), "passed": ok, "checks": [c.to_dict() for c in checks]}
    write_atomic(cfg.output, json.dumps(report, indent=2) + "\n")
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: measured={c.measured:.6g} expected={c.expected:.6g} "
              f"tol={c.tolerance:.3g}", file=sys.stderr)
    return 0 if ok else 1


def dump_columns() -> list[str]:
    cols = ["index"]
    for half in ("alpha", "beta"):
        for m in ModeIndex:
            cols += [f"{half}_{m.label}_re", f"{half}_{m.label}_im"]
    return cols


def cmd_dump(cfg: RunConfig) -> int:
    cap = cfg.extra.get("cap", DUMP_CAP)
    if cfg.samples > cap:
        raise ConfigurationError(f"--samples {cfg.samples} exceeds the dump cap {cap}")
    rows = []
    for start, count in chunk_ranges(cfg.samples):
        p = sample_block(cfg.seed, start, count, cfg.pairs, cfg.sampler)
        x = p.real_coordinates()
        for k in range(count):
            rows.append([start + k] + x[k].tolist())
    emit(cfg, dump_columns(), rows)
    return 0


COMMANDS = {"chsh": cmd_chsh, "hist": cmd_hist, "validate": cmd_validate, "dump": cmd_dump}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="64-bit generator seed")
    common.add_argument("--samples", type=int, default=None, help="number of Bell-state samples")
    common.add_argument("--pairs", type=int, default=1, help="photon pairs N (1..8)")
    common.add_argument("--sampler", choices=[k.value for k in SamplerKind], default="exact")
    common.add_argument("--theta-min", type=parse_angle, default=0.0)
    common.add_argument("--theta-max", type=parse_angle, default=math.pi / 2)
    common.add_argument("--theta-steps", type=int, default=25)
    common.add_argument("--workers", type=int, default=1, help="worker processes")
    common.add_argument("--output", "-o", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")

    parser = argparse.ArgumentParser(
        prog="bellsim", description="Positive-P sampling of a photonic Bell state and CHSH estimates."
    )
    parser.add_argument("--version", action="version", version=f"bellsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("chsh", parents=[common], help="CHSH violation sweep over the relative angle")

    hist = sub.add_parser("hist", parents=[common], help="histogram of spin/correlation variables")
    hist.add_argument("--var", dest="variables", action="append", type=parse_variable,
                      help="spin:SITE:THETA, corr:THETA_A:THETA_B or number:MODE (at most two)")
    hist.add_argument("--bins", type=int, default=101)
    hist.add_argument("--range", nargs=2, type=float, default=[-4.0, 4.0], metavar=("LO", "HI"))

    val = sub.add_parser("validate", parents=[common], help="run the self-consistency suites")
    val.add_argument("--jacobian", type=float, default=None, help=argparse.SUPPRESS)
    val.add_argument("--z-tol", type=float, default=4.0, help="statistical tolerance in standard errors")

    dump = sub.add_parser("dump", parents=[common], help="write raw phase-space samples")
    dump.add_argument("--cap", type=int, default=DUMP_CAP, help="maximum samples allowed")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    extra = {}
    if args.command == "hist":
        variables = args.variables or [
            {"kind": "spin", "site": "A", "theta": 0.0},
            {"kind": "spin", "site": "B", "theta": 0.0},
        ]
        if len(variables) > 2:
            raise ConfigurationError("at most two --var selections")
        extra = {"variables": variables, "bins": args.bins, "range": list(args.range)}
    elif args.command == "validate":
        extra = {"z_tol": args.z_tol}
        if args.jacobian is not None:
            extra["jacobian"] = args.jacobian
    elif args.command == "dump":
        extra = {"cap": args.cap}
    samples = args.samples if args.samples is not None else DEFAULT_SAMPLES[args.command]
    return RunConfig(
        command=args.command,
        seed=args.seed,
        samples=samples,
        pairs=args.pairs,
        sampler=args.sampler,
        theta_min=args.theta_min,
        theta_max=args.theta_max,
        theta_steps=args.theta_steps,
        workers=args.workers,
        output=args.output,
        format=args.format,
        extra=extra,
    ).validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except ConfigurationError as exc:
        print(f"bellsim: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"bellsim: I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
