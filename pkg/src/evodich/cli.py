"""Command-line entry point.

    evodich analyze  --input spec.json [--out DIR] [-N 32] [--step H] [-p 2] [--tol 1e-10]
    evodich verify   [--input spec.json] [--out DIR] [-N 32] [--seed 24301]
    evodich gallery  [--out DIR] [-N 32] [--seed 24301] [--format json|csv]
    evodich spectrum --input spec.json [--out DIR] [-N 32] [--step H]

Exit codes: 0 success, 1 error (or an inconsistent equivalence table for
``verify``), 2 when ``analyze`` finds spectrum on the unit circle.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .dichotomy import RankError, projections_for_family, verify_dichotomy
from .propagator import DEFAULT_TOL, IntegrationError, SpecError, build_family, load_spec
from .semigroup import MAX_DENSE_SIZE, BlockShiftOperator, SizeError, assemble_line, semigroup_spectrum
from .spectrum import greiner_inequality_check
from .theorems import (
    DEFAULT_SEED,
    DEGENERATE_TOL,
    check_line_semigroup,
    check_nonautonomous_semigroup,
    check_periodic_semigroup,
    check_spectral_hyperbolicity,
    headline,
    run_gallery,
)

EXIT_OK, EXIT_ERROR, EXIT_ON_AXIS = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    input: Path | None
    out: Path | None
    N: int
    step: float | None
    p: float
    tol: float
    seed: int
    format: str

    def validate(self):
        if self.N < 2:
            raise UsageError("-N must be >= 2")
        if not self.tol > 0:
            raise UsageError("--tol must be > 0")
        if self.step is not None and not self.step > 0:
            raise UsageError("--step must be > 0")
        if not 1 <= self.p < math.inf:
            raise UsageError("-p must lie in [1, inf)")
        if self.command in ("analyze", "spectrum") and self.input is None:
            raise UsageError(f"{self.command} needs --input")
        if self.input is not None and not self.input.is_file():
            raise UsageError(f"input file not found: {self.input}")
        if self.out is not None and self.out.exists() and not self.out.is_dir():
            raise UsageError(f"--out is not a directory: {self.out}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="evodich",
        description="Uniform stability and exponential dichotomy of y' = A(t) y "
        "through discretized evolution semigroups.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "analyze": "spectrum of e^{hD}, dichotomy projection and verdict for one system",
        "verify": "equivalence checks for one system, or for the whole gallery",
        "gallery": "run the built-in gallery and write the summary table",
        "spectrum": "eigenvalues of e^{hD} as re,im rows for plotting",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--input", type=Path, help="system spec (JSON)")
        p.add_argument("--out", type=Path, help="output directory (default: print to stdout)")
        p.add_argument("-N", type=int, default=32, help="grid cells per window (default 32)")
        p.add_argument("--step", type=float, help="grid step h; overrides the period / N split")
        p.add_argument("-p", type=float, default=2.0, help="L_p exponent for norms (default 2)")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="integration tolerance")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed")
        p.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(ns.command, ns.input, ns.out, ns.N, ns.step, ns.p, ns.tol, ns.seed, ns.format)
    cfg.validate()
    return cfg


def _window(spec, cfg: RunConfig) -> tuple[float, float, int]:
    """(x0, h, N) for the cyclic discretization."""
    if spec.kind == "sampled":
        lo, hi = spec.span
        length = hi - lo
    else:
        lo = 0.0
        length = 2 * math.pi if spec.kind == "constant" else spec.period
    if cfg.step is None:
        return lo, length / cfg.N, cfg.N
    if spec.kind == "constant":
        return lo, cfg.step, cfg.N
    n = round(length / cfg.step)
    if n < 2 or abs(n * cfg.step - length) > 1e-9 * length:
        raise UsageError(f"--step {cfg.step:g} does not divide the window length {length:.17g}")
    return lo, length / n, n


def _operator(spec, cfg: RunConfig):
    x0, h, N = _window(spec, cfg)
    if N * spec.dimension > MAX_DENSE_SIZE:
        raise SizeError(f"N*d = {N * spec.dimension} exceeds the dense limit {MAX_DENSE_SIZE}")
    fam = build_family(spec, x0, h, N, cfg.tol)
    T = assemble_line(fam, "cyclic", periodize=spec.kind == "sampled")
    return fam, T


def _window_trend(fam, T, rep) -> list[dict]:
    """Gaps of the periodized operator on leading sub-windows of 1/4, 1/2 and all of the window."""
    rows = []
    for frac in (0.25, 0.5, 1.0):
        n = max(2, round(fam.N * frac))
        sub = rep if n == fam.N else semigroup_spectrum(BlockShiftOperator(T.weights[:n], "cyclic", T.h))
        rows.append(
            {
                "window": [float(fam.x0), float(fam.x0 + n * fam.h)],
                "N": n,
                "unit_circle_gap": sub.unit_circle_gap,
                "exponent_gap": sub.axis_gap,
            }
        )
    return rows


class _Sink:
    def __init__(self, out: Path | None):
        self.out = out
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str, primary: bool = True):
        """Write a file under ``out``; without ``out`` only primary outputs go to stdout."""
        if self.out is None:
            if primary:
                sys.stdout.write(text)
        else:
            (self.out / name).write_text(text, encoding="utf-8")


def cmd_analyze(cfg: RunConfig) -> int:
    spec = load_spec(cfg.input)
    fam, T = _operator(spec, cfg)
    rep = semigroup_spectrum(T)
    sink = _Sink(cfg.out)
    spectrum_doc = rep.to_dict()
    spectrum_doc["meta"] = {k: v for k, v in rep.meta.items()}
    on_axis = rep.unit_circle_gap <= DEGENERATE_TOL
    summary = {
        "system": spec.name,
        "kind": spec.kind,
        "N": T.N,
        "h": T.h,
        "unit_circle_gap": rep.unit_circle_gap,
        "growth_bound": {"C": fam.C, "beta": fam.beta},
    }
    if spec.kind == "constant":
        K = math.ceil(np.linalg.norm(spec.matrix, 2)) + 1
        try:
            summary["resolvent_multiplier_constant"] = greiner_inequality_check(
                spec.matrix, trials=20, K=K, p=cfg.p, grid=1024, seed=cfg.seed
            )
        except ValueError:  # ik in sigma(A)
            summary["resolvent_multiplier_constant"] = None
        summary["p"] = cfg.p
    if T.meta.get("periodized"):
        # a finite window closed into a circle: report the trend, not just one verdict
        summary["periodized"] = True
        summary["window_trend"] = _window_trend(fam, T, rep)
    dich = None
    if on_axis:
        summary["verdict"] = "on-axis"
    else:
        try:
            P, riesz = projections_for_family(fam, T)
            dich = verify_dichotomy(fam, P, provenance="riesz")
        except RankError as exc:
            summary["verdict"] = "none"
            summary["projection_error"] = str(exc)
        else:
            summary["verdict"] = dich.verdict
            summary["expansion"] = dich.rank < spec.dimension
            summary["quadrature_nodes"] = riesz.nodes
            sink.write("projections.csv", P.to_csv(), primary=False)
    if cfg.format == "csv":
        sink.write("spectrum.csv", io.eigen_csv(rep.eigenvalues), primary=False)
    else:
        sink.write("spectrum.json", io.dumps(spectrum_doc), primary=False)
    dich_doc = dich.to_dict() if dich is not None else {"verdict": summary["verdict"]}
    dich_doc["summary"] = summary
    sink.write("dichotomy.json", io.dumps(dich_doc))
    return EXIT_ON_AXIS if on_axis else EXIT_OK


def _tables_output(tables, cfg: RunConfig, sink: _Sink, name: str):
    if cfg.format == "csv":
        rows = [r for t in tables for r in t.csv_rows()]
        sink.write(f"{name}.csv", io.to_csv(["system", "theorem", "condition", "verdict", "margin"], rows))
    else:
        sink.write(f"{name}.json", io.dumps([t.to_dict() for t in tables]))


def cmd_verify(cfg: RunConfig) -> int:
    sink = _Sink(cfg.out)
    if cfg.input is None:
        entries = run_gallery(N=cfg.N, seed=cfg.seed)
        if any(e.error for e in entries):
            for e in entries:
                if e.error:
                    print(f"evodich: {e.system.name}: {e.error}", file=sys.stderr)
            return EXIT_ERROR
        tables = [t for e in entries for t in e.tables]
    else:
        spec = load_spec(cfg.input)
        tables = []
        if spec.kind == "constant":
            tables.append(check_periodic_semigroup(spec.matrix, max(cfg.N, 8), name=spec.name))
            tables.append(check_line_semigroup(spec.matrix, 1.0, max(cfg.N, 8), name=spec.name))
        if spec.kind in ("constant", "periodic"):
            x0, h, N = _window(spec, cfg)
            fam = build_family(spec, x0, h, N, cfg.tol)
            tables.append(check_nonautonomous_semigroup(spec, N, cfg.seed, cfg.tol, fam=fam))
            tables.append(check_spectral_hyperbolicity(spec, N, cfg.tol, fam=fam)[0])
        else:
            raise UsageError("verify needs a constant or periodic spec")
    _tables_output(tables, cfg, sink, "tables")
    bad = [t for t in tables if t.status == "fail"]
    return EXIT_ERROR if bad else EXIT_OK


def cmd_gallery(cfg: RunConfig) -> int:
    entries = run_gallery(N=cfg.N, seed=cfg.seed)
    sink = _Sink(cfg.out)
    if cfg.format == "csv":
        rows = [r for e in entries for t in e.tables for r in t.csv_rows()]
        sink.write("gallery.csv", io.to_csv(["system", "theorem", "condition", "verdict", "margin"], rows))
    else:
        doc = {
            "seed": cfg.seed,
            "N": cfg.N,
            "systems": [e.to_dict() for e in entries],
            "headline": headline(entries),
        }
        sink.write("gallery.json", io.dumps(doc))
    ok = all(e.matches_expected for e in entries) and all(
        t.status != "fail" for e in entries for t in e.tables
    )
    return EXIT_OK if ok else EXIT_ERROR


def cmd_spectrum(cfg: RunConfig) -> int:
    spec = load_spec(cfg.input)
    _, T = _operator(spec, cfg)
    rep = semigroup_spectrum(T)
    sink = _Sink(cfg.out)
    sink.write("spectrum.csv", io.eigen_csv(rep.eigenvalues))
    meta = {"unit_circle_gap": rep.unit_circle_gap, **rep.meta}
    sink.write("spectrum_meta.json", io.dumps(meta), primary=False)
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "verify": cmd_verify, "gallery": cmd_gallery, "spectrum": cmd_spectrum}


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        return COMMANDS[cfg.command](cfg)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, SpecError, SizeError, IntegrationError, OverflowError, ValueError, OSError) as exc:
        print(f"evodich: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
