"""Command-line front end.

Subcommands::

    thermal-bound gamma  --x-min 1e-3 --x-max 1e3 --points 200 --output gamma.csv
    thermal-bound point  --beta 1 [--eta 1e-6] [--format pretty|csv]
    thermal-bound sweep  [--beta-min 0.02 --beta-max 50 --beta-points 200] --output sweep.csv
    thermal-bound verify [--input sweep.csv]

Exit codes: 0 success, 1 I/O failure, 2 usage or domain error, 3 the
bound chain failed verification.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .brownian import OscillatorModel
from .errors import DomainError
from .specfun import UnitSystem, gamma_big
from .sweep import (
    BoundReport, SweepConfig, evaluate_point, log_beta_grid, read_csv, run_sweep,
    verify_chain, workers_from_env, write_csv,
)

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("thermal_bound")


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    """Parsed settings shared by the model-driven subcommands."""

    subcommand: str = "sweep"
    mass: float = 1.0
    omega0: float = 1.0
    eta: float = 10.0
    zeta: float = 10.0
    hbar: float = 1.0
    k_boltzmann: float = 1.0
    beta: Optional[List[float]] = None
    beta_min: float = 0.02
    beta_max: float = 50.0
    beta_points: int = 200
    rel_tol: float = 1e-11
    output: str = "-"
    format: str = "csv"

    def model(self) -> OscillatorModel:
        return OscillatorModel(self.mass, self.omega0, self.eta, self.zeta)

    def units(self) -> UnitSystem:
        return UnitSystem(self.hbar, self.k_boltzmann)

    def beta_grid(self) -> tuple:
        if self.beta is not None:
            return tuple(self.beta)
        return log_beta_grid(self.beta_min, self.beta_max, self.beta_points)

    def sweep_config(self) -> SweepConfig:
        return SweepConfig(self.model(), self.units(), self.beta_grid(), self.rel_tol)

    def to_flags(self) -> List[str]:
        """Flags that parse back to an equal config."""
        flags = [self.subcommand]
        for f in dataclasses.fields(self):
            if f.name == "subcommand":
                continue
            value = getattr(self, f.name)
            if value is None or (self.subcommand == "point" and f.name in _GRID_KEYS):
                continue
            if f.name == "beta":
                value = ",".join(repr(b) for b in value)
            flags += [f"--{f.name.replace('_', '-')}", str(value)]
        return flags


_GRID_KEYS = ("beta_min", "beta_max", "beta_points")
CONFIG_KEYS = {f.name: f for f in dataclasses.fields(CliConfig) if f.name != "subcommand"}


def _convert(key: str, raw: str):
    if key == "beta":
        try:
            return [float(b) for b in raw.split(",") if b.strip()]
        except ValueError:
            raise UsageError(f"beta: cannot parse {raw!r}") from None
    if key in ("output", "format"):
        return raw
    try:
        return int(raw) if key == "beta_points" else float(raw)
    except ValueError:
        raise UsageError(f"{key}: cannot parse {raw!r}") from None


def read_config_file(path: str) -> Dict[str, object]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out: Dict[str, object] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _convert(key, value)
    return out


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    for key in ("mass", "omega0", "eta", "zeta", "hbar", "k_boltzmann", "rel_tol"):
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None)
    p.add_argument("--config", default=None, help="key=value file; flags take precedence")
    p.add_argument("--output", default=None, help="output path ('-' for stdout)")
    p.add_argument("--format", default=None, choices=("csv", "pretty"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermal-bound", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    pg = sub.add_parser("gamma", help="tabulate Gamma(x) on a log grid")
    pg.add_argument("--x-min", type=float, default=1e-3)
    pg.add_argument("--x-max", type=float, default=1e3)
    pg.add_argument("--points", type=int, default=200)
    pg.add_argument("--output", default="-")

    pp = sub.add_parser("point", help="bound report at one temperature")
    _add_model_flags(pp)
    pp.add_argument("--beta", default=None)

    for name, text in (("sweep", "temperature sweep to CSV"), ("verify", "check the bound chain")):
        ps = sub.add_parser(name, help=text)
        _add_model_flags(ps)
        ps.add_argument("--beta", default=None, help="comma-separated explicit grid")
        ps.add_argument("--beta-min", dest="beta_min", default=None)
        ps.add_argument("--beta-max", dest="beta_max", default=None)
        ps.add_argument("--beta-points", dest="beta_points", default=None)
        if name == "sweep":
            ps.add_argument("--spectra-dir", default=None, help="also write P(w) grids here")
        else:
            ps.add_argument("--input", default=None, help="verify an existing sweep CSV")
    return parser


def resolve_config(args: argparse.Namespace) -> CliConfig:
    values: Dict[str, object] = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key in CONFIG_KEYS:
        raw = getattr(args, key, None)
        if raw is not None:
            values[key] = _convert(key, raw) if isinstance(raw, str) and key not in ("output", "format") else raw
    cfg = CliConfig(subcommand=args.subcommand, **values)
    if cfg.format not in ("csv", "pretty"):
        raise UsageError(f"format must be csv or pretty, got {cfg.format!r}")
    for key in ("mass", "omega0", "eta", "zeta", "hbar", "k_boltzmann", "rel_tol"):
        if not math.isfinite(getattr(cfg, key)):
            raise UsageError(f"{key} must be finite")
    return cfg


def parse_config(argv: Sequence[str]) -> CliConfig:
    return resolve_config(build_parser().parse_args(list(argv)))


@contextmanager
def _open_output(path: str):
    if path in ("-", ""):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


PRETTY_FIELDS = (
    ("beta", "beta"), ("temperature", "temperature"), ("delta_x", "delta_x"),
    ("delta_p", "delta_p"), ("product", "delta_x*delta_p"), ("heisenberg", "heisenberg bound"),
    ("boltzmann", "boltzmann bound"), ("r", "r = delta_x/lambda_th"), ("gamma_arg", "gamma argument"),
    ("jensen_slack", "jensen slack"),
)


def format_pretty(report: BoundReport) -> str:
    lines = [f"{label:>22}: {getattr(report, name):.6g}" for name, label in PRETTY_FIELDS]
    s1, s2 = report.sumrule_residuals
    lines.append(f"{'sum-rule residuals':>22}: {s1:.6g}, {s2:.6g}")
    return "\n".join(lines) + "\n"


def cmd_gamma(x_min: float, x_max: float, points: int, output: str) -> int:
    if not (0 < x_min < x_max and math.isfinite(x_max)) or points < 2:
        raise UsageError("gamma needs 0 < x-min < x-max and points >= 2")
    xs = np.geomspace(x_min, x_max, points)
    with _open_output(output) as out:
        out.write("x,gamma\n")
        for x in xs:
            out.write(f"{x:.17g},{gamma_big(float(x)).gamma:.17g}\n")
    return EXIT_OK


def cmd_point(cfg: CliConfig) -> int:
    if not cfg.beta or len(cfg.beta) != 1:
        raise UsageError("point needs exactly one --beta value")
    report = evaluate_point(cfg.model(), cfg.beta[0], cfg.units(), cfg.rel_tol)
    with _open_output(cfg.output) as out:
        if cfg.format == "pretty":
            out.write(format_pretty(report))
        else:
            write_csv([report], out)
    summary = verify_chain([report])
    return EXIT_OK if summary.passed else EXIT_VERIFY


def _print_summary(summary, to_stderr: bool) -> None:
    stream = sys.stderr if to_stderr else sys.stdout
    for line in summary.lines():
        print(line, file=stream)


def cmd_sweep(cfg: CliConfig, spectra_dir: Optional[str] = None) -> int:
    config = cfg.sweep_config()
    if spectra_dir:
        config = dataclasses.replace(config, emit_spectra=True)
    reports = run_sweep(config, workers=workers_from_env())
    with _open_output(cfg.output) as out:
        write_csv(reports, out)
    if spectra_dir:
        d = Path(spectra_dir)
        d.mkdir(parents=True, exist_ok=True)
        for i, r in enumerate(reports):
            if r.spectrum is not None:
                with open(d / f"p_{i:04d}_beta_{r.beta:.6g}.csv", "w", encoding="utf-8", newline="") as fh:
                    r.spectrum.write_csv(fh)
    summary = verify_chain(reports)
    _print_summary(summary, to_stderr=cfg.output in ("-", ""))
    return EXIT_OK if summary.passed else EXIT_VERIFY


def cmd_verify(cfg: CliConfig, input_path: Optional[str] = None) -> int:
    if input_path:
        with open(input_path, encoding="utf-8") as fh:
            reports = read_csv(fh)
        if not reports:
            raise UsageError(f"{input_path} holds no rows")
    else:
        reports = run_sweep(cfg.sweep_config(), workers=workers_from_env())
    summary = verify_chain(reports)
    _print_summary(summary, to_stderr=False)
    return EXIT_OK if summary.passed else EXIT_VERIFY


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.subcommand == "gamma":
            return cmd_gamma(args.x_min, args.x_max, args.points, args.output)
        cfg = resolve_config(args)
        if args.subcommand == "point":
            return cmd_point(cfg)
        if args.subcommand == "sweep":
            return cmd_sweep(cfg, args.spectra_dir)
        return cmd_verify(cfg, args.input)
    except (UsageError, DomainError) as exc:
        print(f"thermal-bound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"thermal-bound: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ArithmeticError as exc:
        print(f"thermal-bound: numerical failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
