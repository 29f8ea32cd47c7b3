#!/usr/bin/env python3
"""
etf-dynamics command line: one subcommand per analysis, tables written as CSV and pictures as PPM.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, TextIO, Tuple

import pandas as pd
from aenum import Enum, NoAlias

from lemmas.suite import run_suite, suite
from measure.density import HitPredicate, estimate_escape_density, estimate_nonescaping_tail
from measure.parameters import ParameterSet, mk_schedule
from measure.squares import SquareRegion
from model.function_model import FunctionModel
from model.spec_io import PRESETS, FunctionSpec, hemke_constants, load_spec, parse_lambda, preset
from orbits.iteration import iterate_orbit
from orbits.singular import recurrence_verdict, singular_orbit_report
from render.classify import render_classification
from render.image import ImageSpec, write_png, write_ppm
from util.errors import ConfigError, DynamicsError, InvalidParams, InvalidSpec
from util.log import configure, logerr
from util.params import get_param, load_overrides

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

PRECISION = "%.15g"


class Command(Enum):
    _settings_ = NoAlias

    render = "render"
    orbit = "orbit"
    singular_report = "singular-report"
    verdict = "verdict"
    measure = "measure"
    schedule = "schedule"
    verify_lemmas = "verify-lemmas"
    asymptotic_values = "asymptotic-values"

    @classmethod
    def from_name(cls, name: str) -> Command:
        return cls[name.replace("-", "_")]


class UsageParser(argparse.ArgumentParser):
    """Argument parser whose errors end with a one-line hint and exit code 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\nfix: see '{self.prog} --help' for accepted values\n")


def _floats(text: str, count: Optional[int] = None) -> Tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")
    if count is not None and len(values) != count:
        raise argparse.ArgumentTypeError(f"expected {count} comma separated numbers, got {len(values)}")
    return values


def window_arg(text: str) -> Tuple[float, ...]:
    return _floats(text, 4)


def point_arg(text: str) -> complex:
    re, im = _floats(text, 2)
    return complex(re, im)


def radii_arg(text: str) -> Tuple[float, ...]:
    return _floats(text)


@dataclass(frozen=True)
class RunConfig:
    command: Command
    spec_file: Optional[Path]
    preset: Optional[str]
    lam: Optional[str]
    params_file: Optional[Path]
    threads: Optional[int]
    out: Optional[Path]
    args: argparse.Namespace

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> RunConfig:
        return cls(
            Command.from_name(ns.command),
            getattr(ns, "spec", None),
            getattr(ns, "preset", None),
            getattr(ns, "lam", None),
            ns.params,
            ns.threads,
            getattr(ns, "out", None),
            ns,
        )

    def function_spec(self) -> FunctionSpec:
        """
        :raises InvalidSpec: if neither a spec file nor a preset was given, or either is invalid
        """
        if self.spec_file is not None:
            if self.lam is not None:
                raise InvalidSpec("--lambda only applies to --preset rees-exp")
            return load_spec(self.spec_file)
        if self.preset is None:
            raise InvalidSpec(f"{self.command.value} needs --spec FILE or --preset NAME")
        lam = parse_lambda(self.lam) if self.lam is not None else None
        return preset(self.preset, lam)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--params", type=Path, default=None, help="YAML file overriding config/dynamics.yaml keys")
    p.add_argument("--threads", type=int, default=None, help="worker hint, falls back to ETF_THREADS")
    verbosity = p.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="log debug messages")
    verbosity.add_argument("--quiet", action="store_true", help="log warnings and errors only")


def _add_spec(p: argparse.ArgumentParser) -> None:
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--spec", type=Path, default=None, help="function spec JSON file")
    source.add_argument("--preset", choices=sorted(PRESETS), default=None, help="built-in function")
    p.add_argument("--lambda", dest="lam", default=None, help="multiplier for rees-exp, e.g. 2pi_i or 0.5+1j")


def _add_out(p: argparse.ArgumentParser, help_text: str = "CSV output file, stdout when omitted") -> None:
    p.add_argument("--out", type=Path, default=None, help=help_text)


def build_parser() -> argparse.ArgumentParser:
    formatter = argparse.ArgumentDefaultsHelpFormatter
    parser = UsageParser(prog="etf-dynamics", description=__doc__.strip(), formatter_class=formatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=UsageParser)

    def command(c: Command, help_text: str, spec: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(c.value, help=help_text, description=help_text, formatter_class=formatter)
        if spec:
            _add_spec(p)
        _add_common(p)
        return p

    p = command(Command.render, "classify every pixel of a window and write a PPM image")
    p.add_argument(
        "--window",
        type=window_arg,
        default=tuple(get_param("cli/window", (-2.0, 2.0, -2.0, 2.0))),
        help="re_min,re_max,im_min,im_max; write --window=-2,2,-2,2 when it starts with a minus",
    )
    p.add_argument("--size", type=int, default=get_param("render/size", 512), help="width and height in pixels")
    p.add_argument("--max-iter", type=int, default=get_param("render/max_iter", 200), help="iterations per pixel")
    p.add_argument("--seed", type=int, default=None, help="sub-pixel jitter seed, no jitter when omitted")
    p.add_argument("--out", type=Path, default=Path("fig.ppm"), help="PPM output file")
    p.add_argument("--png", type=Path, default=None, help="also write a PNG copy")

    p = command(Command.orbit, "iterate one starting point and classify its orbit")
    p.add_argument("--z0", type=point_arg, required=True, help="re,im; write --z0=-1,0 when it starts with a minus")
    p.add_argument("--max-iter", type=int, default=get_param("orbit/max_iter", 200), help="iteration budget")
    _add_out(p)

    p = command(Command.singular_report, "orbits of every asymptotic and critical value")
    p.add_argument("--max-iter", type=int, default=get_param("orbit/max_iter", 200), help="iteration budget")
    _add_out(p)

    p = command(Command.verdict, "recurrence verdict drawn from the singular orbits")
    p.add_argument("--max-iter", type=int, default=get_param("orbit/max_iter", 200), help="iteration budget")

    p = command(Command.measure, "escape density of a square or non-escaping fraction of unit annuli")
    p.add_argument("--mode", choices=("square", "annuli"), default="square", help="what to sample")
    p.add_argument("--center", type=point_arg, default=complex(20.0, 20.0), help="square centre re,im")
    p.add_argument("--half-side", type=float, default=1.0, help="square half side")
    p.add_argument("--radii", type=radii_arg, default=(10.0, 11.0, 12.0), help="annulus inner radii R1,R2,...")
    p.add_argument("--n", type=int, default=get_param("measure/n_samples", 10000), help="samples per region")
    p.add_argument("--max-iter", type=int, default=get_param("measure/max_iter", 60), help="orbit budget")
    p.add_argument("--seed", type=int, default=get_param("measure/seed", 20240601), help="sampling seed")
    p.add_argument(
        "--eps-shadow", type=float, default=get_param("measure/eps_shadow", 1.0e-3), help="relative shadow radius"
    )
    p.add_argument(
        "--predicate",
        choices=("escaped-or-shadows", "escaped"),
        default="escaped-or-shadows",
        help="what counts as a hit in square mode",
    )
    _add_out(p)

    p = command(Command.schedule, "radius schedule M_k and its product check", spec=False)
    p.add_argument("--M0", type=float, default=get_param("measure/M", 10.0), help="starting radius, > 1")
    p.add_argument("--eps", type=float, default=get_param("measure/epsilon", 0.2), help="exponent epsilon")
    p.add_argument("--tau", type=float, default=get_param("measure/tau", 0.5), help="ball exponent tau")
    p.add_argument("--beta", type=float, default=get_param("measure/beta", 0.0), help="area exponent beta")
    p.add_argument("--kmax", type=int, default=get_param("measure/k_max", 20), help="number of steps")
    _add_out(p)

    p = command(Command.verify_lemmas, "numerical checks of the distortion and measure lemmas")
    p.add_argument("--only", action="append", default=None, help="run only this check, repeatable")
    p.add_argument("--list", action="store_true", help="list the check names and exit")

    p = command(Command.asymptotic_values, "asymptotic values along the critical directions as CSV")
    p.add_argument("--r-max", type=float, default=get_param("function_model/asymptotic_r_max", 1.0e3), help="ray cap")
    p.add_argument("--tol", type=float, default=get_param("function_model/asymptotic_tol", 1.0e-10), help="accuracy")
    _add_out(p)
    return parser


def _emit(frame: pd.DataFrame, out: Optional[Path], stream: TextIO) -> None:
    if out is None:
        frame.to_csv(stream, index=False)
    else:
        frame.to_csv(out, index=False)


def _announce(spec: FunctionSpec, stream: TextIO) -> None:
    """Print the constants a preset was built from, to 15 digits."""
    if spec.name == "hemke-cubic":
        a, b = hemke_constants()
        print(f"# a = {PRECISION % a}, b = {PRECISION % b}", file=stream)
    elif spec.name == "rees-exp":
        lam = spec.c
        print(f"# lambda = {PRECISION % lam.real} + {PRECISION % lam.imag}i", file=stream)


def run_render(cfg: RunConfig, model: FunctionModel, stream: TextIO) -> int:
    a = cfg.args
    img = ImageSpec.from_params(window=a.window, width=a.size, height=a.size, max_iter=a.max_iter, seed=a.seed)
    buf = render_classification(model, img, cfg.threads)
    write_ppm(buf, a.out)
    if a.png is not None:
        write_png(buf, a.png)
    print(f"wrote {a.out}: " + ", ".join(f"{k}={v}" for k, v in buf.counts.items()), file=stream)
    return EXIT_OK


def run_orbit(cfg: RunConfig, model: FunctionModel, stream: TextIO) -> int:
    record = iterate_orbit(model, cfg.args.z0, cfg.args.max_iter)
    _emit(record.to_frame(), cfg.out, stream)
    print(f"classification: {record.describe()}", file=stream)
    return EXIT_OK


def run_singular_report(cfg: RunConfig, model: FunctionModel, stream: TextIO) -> int:
    report = singular_orbit_report(model, cfg.args.max_iter)
    _emit(report.to_frame(), cfg.out, stream)
    return EXIT_OK


def run_verdict(cfg: RunConfig, model: FunctionModel, stream: TextIO) -> int:
    report = singular_orbit_report(model, cfg.args.max_iter)
    print(recurrence_verdict(report).describe(), file=stream)
    print(report.to_frame().to_string(index=False), file=stream)
    return EXIT_OK


def run_measure(cfg: RunConfig, model: FunctionModel, stream: TextIO) -> int:
    a = cfg.args
    if a.mode == "square":
        predicate = HitPredicate.escaped if a.predicate == "escaped" else HitPredicate.escaped_or_shadows_a
        estimate = estimate_escape_density(
            model,
            SquareRegion(a.center, a.half_side),
            a.n,
            a.max_iter,
            a.seed,
            a.eps_shadow,
            ParameterSet.from_params(),
            cfg.threads,
            predicate,
        )
        frame = pd.DataFrame([estimate.row()])
    else:
        frame = estimate_nonescaping_tail(model, a.radii, a.n, a.max_iter, a.seed, cfg.threads).to_frame()
    _emit(frame, cfg.out, stream)
    return EXIT_OK


def run_schedule(cfg: RunConfig, stream: TextIO) -> int:
    a = cfg.args
    schedule = mk_schedule(a.M0, a.eps, a.tau, a.kmax, a.beta)
    _emit(schedule.to_frame(), cfg.out, stream)
    print(f"# bound = {PRECISION % schedule.bound}, product_check = {schedule.product_check}", file=stream)
    return EXIT_OK


def run_verify_lemmas(cfg: RunConfig, model: FunctionModel, stream: TextIO) -> int:
    params = ParameterSet.from_params()
    if cfg.args.list:
        print("\n".join(suite(model, params)), file=stream)
        return EXIT_OK
    results = run_suite(model, params, cfg.args.only)
    for result in results:
        print(result.describe(), file=stream)
    failed = [r.name for r in results if not r.passed]
    print(f"summary: {len(results) - len(failed)}/{len(results)} check(s) passed", file=stream)
    return EXIT_VIOLATION if failed else EXIT_OK


def run_asymptotic_values(cfg: RunConfig, model: FunctionModel, stream: TextIO) -> int:
    report = model.asymptotic_values(cfg.args.r_max, cfg.args.tol)
    frame = report.to_frame()[["k", "phi", "re", "im", "quadrature_error", "tail_bound", "group", "escaping"]]
    _emit(frame, cfg.out, stream)
    return EXIT_OK


Handler = Callable[[RunConfig, FunctionModel, TextIO], int]

HANDLERS: Dict[Command, Handler] = {
    Command.render: run_render,
    Command.orbit: run_orbit,
    Command.singular_report: run_singular_report,
    Command.verdict: run_verdict,
    Command.measure: run_measure,
    Command.verify_lemmas: run_verify_lemmas,
    Command.asymptotic_values: run_asymptotic_values,
}


def dispatch(cfg: RunConfig, stream: TextIO) -> int:
    if cfg.command is Command.schedule:
        return run_schedule(cfg, stream)
    spec = cfg.function_spec()
    _announce(spec, stream)
    return HANDLERS[cfg.command](cfg, FunctionModel(spec), stream)


def main(argv: Optional[Sequence[str]] = None, stream: Optional[TextIO] = None) -> int:
    """
    :param argv: arguments without the program name, sys.argv[1:] when omitted
    :param stream: where reports go, stdout when omitted
    :returns: 0 on success, 1 on check violations or numerical failure, 2 on usage or config errors
    """
    stream = stream or sys.stdout
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    configure(logging.DEBUG if ns.verbose else logging.WARNING if ns.quiet else logging.INFO)

    try:
        if ns.params is not None:
            load_overrides(ns.params)
        return dispatch(RunConfig.from_args(ns), stream)
    except (ConfigError, InvalidSpec, InvalidParams) as e:
        logerr(f"{type(e).__name__}: {e}")
        print(f"error: {e}\nfix: check the flags and the --params file against '{ns.command} --help'", file=sys.stderr)
        return EXIT_USAGE
    except DynamicsError as e:
        logerr(f"{ns.command} failed: {type(e).__name__}: {e}")
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
