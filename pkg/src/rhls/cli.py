"""The ``rhls`` command line: constants, transforms, operators, verification runs and demos."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

import jinja2
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .checks import REGISTRY
from .config import get_settings
from .core import ExponentSet, RadialFn, ZonalFn, make_critical_exponents, make_general_exponents, read_csv, write_csv
from .extremal import (
    ExtremalParamsSphere,
    asymptotic_coeffs,
    concentration_demo,
    derive_el_constants,
    el_pair,
    el_residual,
    extremal_sphere,
    fixed_point_minimize,
    integrability_check,
    sphere_el_residual,
)
from .geometry import KelvinParams, kelvin_transform, lift_function
from .inequalities import lognormal_perturbation
from .norms import lr_norm_via_layer_cake, quasi_norm
from .operators import radial_operator, sphere_operator, split_operator
from .quadrature import log_grid, zonal_grid
from .reports import VerificationReport, all_passed, compare, emit_plot_data, lower_bound, reports_document
from .special import kernel_integral, kernel_integral_quadrature, sharp_constant, sphere_area

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

OutputFormat = Literal["json", "csv", "text"]

_REPORT_TEMPLATE = """\
{{ command }}{% for key, value in fields.items() %}
  {{ key }}: {{ value }}{% endfor %}
{% for r in reports %}[{{ "PASS" if r.passed else "FAIL" }}] {{ r.name }} \
{{ r.error_kind }} error {{ "%.3e" | format(r.abs_error if r.error_kind == "absolute" else r.rel_error) }} \
(tolerance {{ "%.1e" | format(r.tolerance) }}){% if r.notes %} - {{ r.notes }}{% endif %}
{% endfor %}{{ passed_count }}/{{ reports | length }} checks passed
"""

_TABLE_TEMPLATE = """\
{{ columns | join("  ") }}
{% for row in rows %}{% for value in row %}{{ "%.10g" | format(value) }}{% if not loop.last %}  {% endif %}{% endfor %}
{% endfor %}"""


class UsageError(ValueError):
    """A flag value outside its admissible domain."""


class RunConfig(BaseModel):
    """Validated options of one command-line run.

    Args:
        command: Subcommand name.
        n: Dimension.
        alpha: Order of the potential, alpha > n.
        p: Integrability exponent; the critical value when omitted.
        nodes: Zonal grid size.
        half_width: Half width of the log radius grid.
        step: Step of the log radius grid.
        seed: Seed of a single seeded run.
        seeds: Number of seeds of a verification run.
        output: Output path; stdout when omitted.
        format: Output format.
    """

    model_config = ConfigDict(extra="allow")

    command: str
    n: Optional[int] = Field(default=None, ge=1)
    alpha: Optional[float] = None
    p: Optional[float] = None
    nodes: Optional[int] = Field(default=None, ge=2)
    half_width: Optional[float] = Field(default=None, gt=0.0)
    step: Optional[float] = Field(default=None, gt=0.0)
    seed: int = 0
    seeds: int = Field(default=1, ge=1)
    output: Optional[str] = None
    format: OutputFormat = "text"

    @model_validator(mode="after")
    def _check_pair(self) -> "RunConfig":
        if self.n is not None and self.alpha is not None and not self.alpha > self.n:
            raise ValueError(f"--alpha must exceed --n, got alpha={self.alpha!r} with n={self.n!r}")
        if self.p is not None and self.n is not None and self.alpha is not None:
            if not self.n / self.alpha < self.p < 1.0:
                raise ValueError(
                    f"--p must lie in (n/alpha, 1) = ({self.n / self.alpha!r}, 1), got {self.p!r}"
                )
        return self

    def option(self, name: str, default: Any = None) -> Any:
        return (self.model_extra or {}).get(name, default)

    def exponents(self) -> ExponentSet:
        if self.n is None or self.alpha is None:
            raise UsageError(f"{self.command} needs --n and --alpha")
        if self.p is None:
            return make_critical_exponents(self.n, self.alpha)
        return make_general_exponents(self.n, self.alpha, self.p)

    def critical_exponents(self) -> ExponentSet:
        exps = self.exponents()
        if not exps.is_critical:
            raise UsageError(f"{self.command} is defined at the critical exponent only; drop --p")
        return exps

    def log_grid(self):
        return log_grid(self.n, half_width=self.half_width, step=self.step)


class Outcome(BaseModel):
    """What a subcommand hands back for rendering."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    reports: List[VerificationReport] = []
    fields: Dict[str, Any] = {}
    rows: List[Tuple[float, ...]] = []
    columns: List[str] = []
    function: Optional[Any] = None

    @property
    def exit_code(self) -> int:
        return EXIT_OK if all_passed(self.reports) else EXIT_FAILED


# --- subcommands ---


def _constant(cfg: RunConfig) -> Outcome:
    n, alpha = cfg.n, cfg.alpha
    nodes = cfg.nodes or get_settings().sphere_nodes
    exps = cfg.exponents()
    n_star = sharp_constant(exps.n, exps.alpha).value
    total = kernel_integral(exps.n, exps.alpha)
    area = sphere_area(exps.n)
    quadrature = area ** (-exps.alpha / exps.n) * kernel_integral_quadrature(exps.n, exps.alpha, nodes)
    report = compare(
        "sharp_constant_cross_check", quadrature, n_star, 1e-8,
        inputs={"n": n, "alpha": alpha, "nodes": nodes}, provenance="cross-check",
    )
    return Outcome(
        reports=[report],
        fields={
            "n_star": n_star,
            "kernel_integral": total,
            "sphere_area": area,
            "cross_check_residual": report.rel_error,
        },
    )


def _sweep(cfg: RunConfig) -> Outcome:
    if cfg.n is None:
        raise UsageError("sweep needs --n")
    lo, hi, count = cfg.option("alpha_min"), cfg.option("alpha_max"), cfg.option("count")
    if not cfg.n < lo < hi:
        raise UsageError(f"--alpha-min/--alpha-max must satisfy n < min < max, got {lo!r}, {hi!r}")
    if count < 2:
        raise UsageError(f"--count must be >= 2, got {count!r}")
    rows = [(float(a), sharp_constant(cfg.n, float(a)).value) for a in np.linspace(lo, hi, count)]
    reports = [
        lower_bound("sweep_positive_finite", min(v for _, v in rows), 0.0, 0.0,
                    error_kind="absolute", degenerate=not all(math.isfinite(v) for _, v in rows))
    ]
    return Outcome(reports=reports, rows=rows, columns=["alpha", "n_star"], fields={"n": cfg.n})


def _kelvin(cfg: RunConfig) -> Outcome:
    exps = cfg.critical_exponents()
    lam = cfg.option("lam")
    if not lam > 0.0:
        raise UsageError(f"--lambda must be positive, got {lam!r}")
    grid = cfg.log_grid()
    # the profile with d = lambda is fixed by the inversion of radius lambda
    u = el_pair(1.0, 1.0, lam, grid, exps).u
    kp = KelvinParams.at_origin(exps.n, lam)
    inverted = kelvin_transform(u, kp, exps)
    expected = el_pair(1.0, 1.0, lam, inverted.grid, exps).u
    twice = kelvin_transform(inverted, kp, exps)
    inputs = {"n": exps.n, "alpha": exps.alpha, "lambda": lam}
    self_inversion = compare(
        "kelvin_self_inversion", float(np.max(np.abs(inverted.values / expected.values - 1.0))),
        0.0, 1e-12, inputs=inputs, provenance="identity", error_kind="absolute",
    )
    involution = compare(
        "kelvin_involution", float(np.max(np.abs(twice.values / u.values - 1.0))),
        0.0, 1e-12, inputs=inputs, provenance="identity", error_kind="absolute",
    )
    return Outcome(reports=[self_inversion, involution],
                   fields={"residual": self_inversion.abs_error})


def _load(cfg: RunConfig):
    path = cfg.option("input")
    if not path:
        raise UsageError(f"{cfg.command} needs --input")
    return read_csv(path)


def _lift(cfg: RunConfig) -> Outcome:
    f = _load(cfg)
    if not isinstance(f, RadialFn):
        raise UsageError("lift needs a radial CSV as --input")
    exps = cfg.exponents()
    return Outcome(function=lift_function(f, exps, cfg.option("kind")))


def _norm(cfg: RunConfig) -> Outcome:
    r = cfg.option("r")
    g = _load(cfg)
    return Outcome(fields={"r": r, "norm": quasi_norm(g, r)})


def _layercake(cfg: RunConfig) -> Outcome:
    r = cfg.option("r")
    if not r < 0.0:
        raise UsageError(f"--r must be negative for the layer-cake route, got {r!r}")
    g = _load(cfg)
    direct = quasi_norm(g, r)
    via_distribution = lr_norm_via_layer_cake(g, r)
    report = compare("layer_cake", via_distribution, direct, 1e-6, inputs={"r": r}, provenance="identity")
    return Outcome(
        reports=[report],
        fields={"direct": direct, "layer_cake": via_distribution, "residual": report.rel_error},
    )


def _apply(cfg: RunConfig) -> Outcome:
    f = _load(cfg)
    exps = cfg.exponents()
    rho = cfg.option("split")
    if isinstance(f, ZonalFn):
        if rho is not None:
            raise UsageError("--split applies to radial input only")
        return Outcome(function=sphere_operator(f, exps))
    if not isinstance(f, RadialFn):
        raise UsageError("apply needs a zonal or radial CSV as --input")
    if rho is None:
        return Outcome(function=radial_operator(f, exps))
    if not rho > 0.0:
        raise UsageError(f"--split must be positive, got {rho!r}")
    return Outcome(function=split_operator(f, rho, cfg.option("part"), exps))


def _verify(cfg: RunConfig) -> Outcome:
    exps = cfg.critical_exponents()
    names = REGISTRY.resolve(cfg.option("which") or ["all"])
    reports = REGISTRY.run(names, exps.n, exps.alpha, list(range(cfg.seeds)), cfg.option("threads"))
    return Outcome(reports=reports, fields={"n": exps.n, "alpha": exps.alpha, "checks": ",".join(names)})


def _minimize(cfg: RunConfig) -> Outcome:
    exps = cfg.critical_exponents()
    grid = zonal_grid(exps.n, cfg.nodes)
    rng = np.random.default_rng(cfg.seed)
    noise = cfg.option("noise")
    start = extremal_sphere(ExtremalParamsSphere(a=1.0), grid, exps)
    start = start.with_values(lognormal_perturbation(start.values, rng, sigma=noise))
    result = fixed_point_minimize(
        start, exps, damping=cfg.option("damping"), tol=cfg.option("tol"), maxit=cfg.option("maxit")
    )
    constant = sharp_constant(exps.n, exps.alpha).value
    reports = [
        compare("minimize_quotient", result.trace[-1], constant, 1e-3,
                inputs={"seed": cfg.seed, "damping": cfg.option("damping")}),
        lower_bound("minimize_converged", 1.0 if result.converged else 0.0, 1.0, 0.0,
                    error_kind="absolute", extra={"iterations": float(result.iterations)}),
        sphere_el_residual(result.F, exps, tolerance=1e-3),
    ]
    rows = [(float(i), q) for i, q in enumerate(result.trace)]
    trace = cfg.option("trace")
    if trace:
        with open(trace, "w", encoding="utf-8", newline="") as handle:
            handle.write(emit_plot_data(rows, ["iteration", "quotient"]))
    return Outcome(
        reports=reports,
        rows=rows,
        columns=["iteration", "quotient"],
        fields={"iterations": result.iterations, "final_quotient": result.trace[-1], "n_star": constant},
    )


def _demo_concentration(cfg: RunConfig) -> Outcome:
    exps = cfg.critical_exponents()
    demo = concentration_demo(cfg.option("eps"), exps, cfg.log_grid())
    return Outcome(
        reports=demo.reports,
        rows=[row.as_row() for row in demo.rows],
        columns=["eps", "f_eps_e1", "potential_e1", "norm_p", "quotient"],
    )


def _el(cfg: RunConfig) -> Outcome:
    exps = cfg.critical_exponents()
    d = cfg.option("d")
    if not d > 0.0:
        raise UsageError(f"--d must be positive, got {d!r}")
    c1, c2 = derive_el_constants(d, exps)
    pair = el_pair(c1, c2, d, cfg.log_grid(), exps)
    coeffs = asymptotic_coeffs(pair)
    reports = [el_residual(pair), *coeffs.reports(), integrability_check(pair)]
    return Outcome(
        reports=reports,
        fields={"c1": c1, "c2": c2, "d": d, "a": coeffs.a, "b": coeffs.b,
                "bounds_constant": coeffs.attach(pair).bounds_constant()},
    )


COMMANDS: Dict[str, Callable[[RunConfig], Outcome]] = {
    "constant": _constant,
    "sweep": _sweep,
    "kelvin": _kelvin,
    "lift": _lift,
    "norm": _norm,
    "layercake": _layercake,
    "apply": _apply,
    "verify": _verify,
    "minimize": _minimize,
    "demo-concentration": _demo_concentration,
    "el": _el,
}


# --- argument parsing ---


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "text"], default="text",
                        help="Output format (default: text).")
    common.add_argument("--json", dest="format", action="store_const", const="json",
                        help="Shortcut for --format json.")
    common.add_argument("--output", default=None, help="Write output here instead of stdout.")
    common.add_argument("--verbose", "-v", action="count", default=0, help="Log more (repeatable).")
    return common


def _pair(sub: argparse.ArgumentParser, required: bool = True) -> None:
    sub.add_argument("--n", type=int, required=required, help="Dimension n >= 1.")
    sub.add_argument("--alpha", type=float, required=required, help="Order alpha > n.")


def _log_grid_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--half-width", type=float, default=None, dest="half_width",
                     help="Half width U of the log radius grid.")
    sub.add_argument("--step", type=float, default=None, help="Step h of the log radius grid.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rhls",
        description="Numerical lab for the reversed Hardy-Littlewood-Sobolev inequality.",
    )
    common = _common()
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("constant", parents=[common], help="Sharp constant and its quadrature cross-check.")
    _pair(p)
    p.add_argument("--nodes", type=int, default=None, help="Gauss-Jacobi nodes of the cross-check.")

    p = subs.add_parser("sweep", parents=[common], help="N*(n, alpha) over a range of alpha.")
    p.add_argument("--n", type=int, required=True, help="Dimension n >= 1.")
    p.add_argument("--alpha-min", type=float, required=True, dest="alpha_min")
    p.add_argument("--alpha-max", type=float, required=True, dest="alpha_max")
    p.add_argument("--count", type=int, default=21, help="Number of alpha values (default: 21).")

    p = subs.add_parser("kelvin", parents=[common], help="Kelvin self-inversion of the extremal profile.")
    _pair(p)
    p.add_argument("--lambda", type=float, default=1.0, dest="lam", help="Inversion radius (default: 1).")
    _log_grid_flags(p)

    p = subs.add_parser("lift", parents=[common], help="Radial CSV on R^n to zonal CSV on S^n.")
    _pair(p)
    p.add_argument("--input", required=True, help="Radial CSV.")
    p.add_argument("--kind", choices=["p", "q"], default="p", help="Transport weight (default: p).")

    p = subs.add_parser("norm", parents=[common], help="Quasi-norm of a sampled function.")
    p.add_argument("--p", type=float, required=True, dest="r", help="Exponent, nonzero.")
    p.add_argument("--input", required=True, help="Function CSV.")

    p = subs.add_parser("layercake", parents=[common], help="Quasi-norm by the distribution function.")
    p.add_argument("--r", type=float, required=True, help="Negative exponent.")
    p.add_argument("--input", required=True, help="Function CSV.")

    p = subs.add_parser("apply", parents=[common], help="Apply the potential operator to a CSV function.")
    _pair(p)
    p.add_argument("--p", type=float, default=None, help="Exponent p in (n/alpha, 1); critical if omitted.")
    p.add_argument("--input", required=True, help="Zonal or radial CSV.")
    p.add_argument("--split", type=float, default=None, help="Split radius rho.")
    p.add_argument("--part", choices=["near", "far"], default="near")

    p = subs.add_parser("verify", parents=[common], help="Seeded verification suite.")
    _pair(p)
    p.add_argument("--seeds", type=int, default=1, help="Number of seeds 0..K-1 (default: 1).")
    p.add_argument("--which", nargs="+", default=["all"], choices=REGISTRY.names() + ["all"])
    p.add_argument("--threads", type=int, default=None, help="Worker threads (default: RHLS_THREADS).")

    p = subs.add_parser("minimize", parents=[common], help="Fixed-point minimization on the sphere.")
    _pair(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--maxit", type=int, default=500)
    p.add_argument("--noise", type=float, default=0.1, help="Log-normal noise of the start (default: 0.1).")
    p.add_argument("--nodes", type=int, default=None, help="Zonal grid size.")
    p.add_argument("--trace", default=None, help="CSV path for the (iteration, quotient) trace.")

    p = subs.add_parser("demo-concentration", parents=[common], help="The concentrating extremal family.")
    _pair(p)
    p.add_argument("--eps", type=float, nargs="+", default=[1.0, 0.1, 0.01])
    _log_grid_flags(p)

    p = subs.add_parser("el", parents=[common], help="Closed-form solution of the integral system.")
    _pair(p)
    p.add_argument("--d", type=float, default=1.0)
    _log_grid_flags(p)
    return parser


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Parse flags into a validated :class:`RunConfig`; argparse exits with status 2 on bad syntax."""
    args = vars(build_parser().parse_args(argv))
    verbose = args.pop("verbose", 0)
    config = RunConfig.model_validate(args)
    _configure_logging(verbose)
    return config


def _configure_logging(verbose: int) -> None:
    if verbose >= 2:
        level: Any = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = get_settings().log_level.upper()
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


# --- rendering ---


def _reports_csv(reports: Sequence[VerificationReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["name", "passed", "error_kind", "abs_error", "rel_error", "tolerance"])
    for r in reports:
        writer.writerow([r.name, r.passed, r.error_kind, repr(r.abs_error), repr(r.rel_error), repr(r.tolerance)])
    return buffer.getvalue()


def render(cfg: RunConfig, outcome: Outcome) -> str:
    """Text of the outcome in the configured format."""
    if outcome.function is not None:
        buffer = io.StringIO()
        write_csv(outcome.function, buffer)
        return buffer.getvalue()
    if cfg.format == "json":
        extra: Dict[str, Any] = dict(outcome.fields)
        if outcome.rows:
            extra["columns"] = outcome.columns
            extra["rows"] = [list(row) for row in outcome.rows]
        return json.dumps(reports_document(cfg.command, outcome.reports, **extra), indent=2) + "\n"
    if cfg.format == "csv":
        if outcome.rows:
            return emit_plot_data(outcome.rows, outcome.columns)
        return _reports_csv(outcome.reports)
    text = jinja2.Template(_REPORT_TEMPLATE, undefined=jinja2.StrictUndefined).render(
        command=cfg.command,
        fields=outcome.fields,
        reports=outcome.reports,
        passed_count=sum(r.passed for r in outcome.reports),
    )
    if outcome.rows:
        text += jinja2.Template(_TABLE_TEMPLATE, undefined=jinja2.StrictUndefined).render(
            columns=outcome.columns, rows=outcome.rows
        )
    return text


def dispatch(cfg: RunConfig) -> Tuple[int, str]:
    """Run one configured command; returns the exit status and the rendered output."""
    logger.info("running %s", cfg.command)
    outcome = COMMANDS[cfg.command](cfg)
    return outcome.exit_code, render(cfg, outcome)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
        status, text = dispatch(cfg)
    except ValidationError as exc:
        for err in exc.errors():
            field = ".".join(str(part) for part in err["loc"]) or "arguments"
            print(f"rhls: error: {field}: {err['msg']}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"rhls: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE

    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
