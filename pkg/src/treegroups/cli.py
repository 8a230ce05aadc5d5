"""Command-line front end.

``treegroups run-suite NAME [--spec FILE] [--degree D] [--depth N] [--trials N]
[--seed HEX] [--cap N] [--format csv|json] [--out PATH]``

Exit status: 0 all checks pass, 1 some check failed, 2 bad configuration,
3 an enumeration exceeded its cap.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np
import sympy
import yaml

from . import __version__
from .constructions import GSSpec, affine_model, gh_group, lemma_group
from .engine import DEFAULT_CAP, is_fractal, is_level_transitive, is_normal_subgroup, orbits_on_level, stabilizer
from .errors import CapacityError, ConfigError, PreconditionError, SamplerError, WitnessViolation
from .reports import CheckResult, Report, emit_report, render, report_csv, report_json
from .specs import AffineSpec, GHSpec, LemmaSpec, load_spec
from .spectra import (
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    Z_SCORE,
    affine_bad_count,
    affine_bad_count_maps,
    bad_cosets,
    burnside_means,
    euler_formulas,
    fpp_report,
    hdim_sequence,
    gs_hdim_limit,
    hdim_ratio,
    martingale_criterion,
    monodromy_bound,
    process_sample,
    sampler_gof,
    theorem_shadow,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CAPACITY = 0, 1, 2, 3
SUITE_FAMILIES = {
    "lemma-theorem": ("lemma",),
    "affine-unicritical": ("affine",),
    "gh-algebra": ("gh",),
    "martingale": None,
    "hdim": None,
}
# failures of the mathematics under test, reported as failed checks
CHECK_ERRORS = (PreconditionError, WitnessViolation, AssertionError, SamplerError)


def load_suites() -> dict:
    text = resources.files("treegroups").joinpath("suites.yaml").read_text()
    return yaml.safe_load(text)


# ------------------------------------------------------------------ context


@dataclass
class SuiteContext:
    suite: str
    degree: int
    depth: int
    trials: int
    seed: int
    cap: int
    spec: object
    notes: list[str] = field(default_factory=list)

    @property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    # lemma family
    @cached_property
    def lemma(self):
        return lemma_group(self.degree, self.depth, self.cap)

    @cached_property
    def lemma_fpp(self):
        bound = Fraction(sympy.factorial(self.degree - 1), self.degree**self.degree)
        return fpp_report(self.lemma.G, "lemma G", bound, "(d-1)!/d^d")

    @cached_property
    def lemma_shadow(self):
        return theorem_shadow(self.lemma.G)

    # affine model
    @cached_property
    def affine(self):
        G = affine_model(self.degree, self.depth, "G", self.cap)
        H = affine_model(self.degree, self.depth, "H", self.cap)
        GH = gh_group(G, H, require_normal=False)
        return G, H, GH

    @cached_property
    def affine_bad(self):
        G, H, GH = self.affine
        return bad_cosets(G, H, GH)

    @cached_property
    def affine_fpp(self):
        return fpp_report(self.affine[2], "affine G_H", self.affine_bad.ratio, "#M/|Q|")

    # generic G_H pair
    @cached_property
    def gh(self):
        G = self.spec.outer.build(self.depth, self.cap)
        H = self.spec.inner.build(self.depth, self.cap)
        return G, H, gh_group(G, H, self.spec.require_normal)

    # martingale / process
    @cached_property
    def group(self):
        return self.spec.build(self.depth, self.cap)

    @cached_property
    def process(self):
        return process_sample(self.spec, self.depth, self.trials, rng=self.rng, seed=self.seed)

    def order_at(self, n: int) -> int:
        closed = self.spec.order(n)
        return closed if closed is not None else self.spec.build(n, self.cap).order

    @property
    def main_order(self) -> int | None:
        if self.suite == "martingale":
            return self.group.order
        return None


OPERATIONS: dict[str, Callable] = {}


def operation(name: str):
    def register(fn):
        OPERATIONS[name] = fn
        return fn
    return register


@operation("lemma_pi2_order")
def _(ctx):
    return ctx.lemma.G.truncate(2).order


@operation("lemma_gh_equals_g")
def _(ctx):
    G, H = ctx.lemma.G, ctx.lemma.H
    return gh_group(G, H).same_elements(G)


@operation("lemma_st2_in_h")
def _(ctx):
    return stabilizer(ctx.lemma.G, "level", 2).issubset(ctx.lemma.H)


@operation("lemma_fpp_min")
def _(ctx):
    return min(row.p_k for row in ctx.lemma_fpp.levels)


@operation("lemma_fpp_monotone")
def _(ctx):
    return ctx.lemma_fpp.monotone


@operation("lemma_shadow_all_d")
def _(ctx):
    return ctx.lemma_shadow.all_equal_d


@operation("lemma_shadow_measure")
def _(ctx):
    return ctx.lemma_shadow.measure


@operation("lemma_index_constant")
def _(ctx):
    indices = set()
    for m in range(2, ctx.depth + 1):
        groups = lemma_group(ctx.degree, m, ctx.cap)
        indices.add(groups.G.order // groups.H.order)
    ctx.notes.append("indices [G:H] at depths 2.." + str(ctx.depth) + ": " + render(sorted(indices)))
    return len(indices) == 1


@operation("euler_sweep")
def _(ctx, max_degree=200):
    for d in range(2, max_degree + 1):
        closed = euler_formulas(d)[0]
        if affine_bad_count(d) != closed:
            return False
        if d <= 40 and affine_bad_count_maps(d) != closed:
            return False
    return True


@operation("euler_count")
def _(ctx):
    return euler_formulas(ctx.degree)[0]


@operation("euler_bound")
def _(ctx):
    return euler_formulas(ctx.degree)[1]


@operation("affine_bad_count")
def _(ctx):
    return len(ctx.affine_bad.bad)


@operation("affine_bad_ratio")
def _(ctx):
    return ctx.affine_bad.ratio


@operation("affine_complete_monodromy")
def _(ctx):
    return bool(ctx.affine_bad.complete_monodromy)


@operation("affine_witnesses")
def _(ctx):
    _, H, GH = ctx.affine
    result = monodromy_bound(GH, H, ctx.affine_bad)
    ctx.notes.append(f"{result.checked} elements over bad cosets checked; first witness path {render(result.witness)}")
    return True


@operation("affine_gh_fpp_min")
def _(ctx):
    return min(row.p_k for row in ctx.affine_fpp.levels)


@operation("affine_gh_fpp_monotone")
def _(ctx):
    return ctx.affine_fpp.monotone


@operation("affine_gh_martingale")
def _(ctx):
    return martingale_criterion(ctx.affine[2]).holds


@operation("gh_contains_h")
def _(ctx):
    _, H, GH = ctx.gh
    return H.issubset(GH)


@operation("gh_inside_g")
def _(ctx):
    G, _, GH = ctx.gh
    return GH.issubset(G)


@operation("gh_h_normal")
def _(ctx):
    _, H, GH = ctx.gh
    return is_normal_subgroup(GH, H)


@operation("gh_normal_in_g")
def _(ctx):
    G, H, GH = ctx.gh
    return (not is_normal_subgroup(G, H)) or is_normal_subgroup(G, GH)


@operation("gh_of_g")
def _(ctx):
    G = ctx.gh[0]
    return gh_group(G, G).same_elements(G)


@operation("gh_lagrange")
def _(ctx):
    G, H, GH = ctx.gh
    return G.order % GH.order == 0 and GH.order % H.order == 0


@operation("gh_fractal_inherited")
def _(ctx):
    G, _, GH = ctx.gh
    return (not is_fractal(G)) or is_fractal(GH)


@operation("mg_level_transitive")
def _(ctx):
    return all(is_level_transitive(ctx.group).values())


@operation("mg_criterion")
def _(ctx):
    return martingale_criterion(ctx.group).holds


@operation("mg_burnside")
def _(ctx):
    means = burnside_means(ctx.group)
    return all(means[k] == len(orbits_on_level(ctx.group, k)) for k in range(ctx.depth + 1))


@operation("mg_sampled_means")
def _(ctx):
    exact = burnside_means(ctx.group)[1:]
    X = ctx.process.trajectories.astype(float)
    for k, target in enumerate(exact):
        col = X[:, k]
        half = Z_SCORE * col.std(ddof=1) / np.sqrt(len(col))
        if abs(col.mean() - float(target)) > max(half, 1e-12):
            return False
    return True


@operation("mg_sampler_gof")
def _(ctx):
    fit = sampler_gof(ctx.group, ctx.spec.sampler(ctx.depth), max(ctx.trials, 1), ctx.rng)
    return fit.pvalue


@operation("hdim_in_unit_interval")
def _(ctx):
    return all(0.0 <= r <= 1.0 for r in ctx.hdim.ratios)


@operation("hdim_closed_form_orders")
def _(ctx):
    compared = 0
    for n in range(1, min(4, ctx.depth) + 1):
        closed = ctx.spec.order(n)
        if closed is None:
            continue
        if closed != ctx.spec.build(n, ctx.cap).order:
            return False
        compared += 1
    if not compared:
        raise AssertionError(f"no closed-form order for the {ctx.spec.family} family at depths <= 4")
    return True


@operation("hdim_d2_formula")
def _(ctx):
    for n in range(2, min(4, ctx.depth) + 1):
        got = hdim_ratio(ctx.spec.build(n, ctx.cap).order, 2, n).exact
        if got != Fraction(2 ** (n - 1), 2**n - 1):
            return False
    return True


@operation("hdim_ratio_at")
def _(ctx, level):
    return ctx.hdim.levels[level - 1].ratio


# ------------------------------------------------------------------- checks


def evaluate_expected(expr, ctx: SuiteContext):
    if isinstance(expr, dict):
        return run_operation(expr["op"], ctx, expr.get("args", {}))
    if isinstance(expr, bool):
        return expr
    value = sympy.sympify(str(expr), locals={"d": sympy.Integer(ctx.degree), "n": sympy.Integer(ctx.depth),
                                              "factorial": sympy.factorial})
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


def run_operation(name: str, ctx: SuiteContext, args: dict):
    if name not in OPERATIONS:
        raise ConfigError(f"unknown operation {name!r}")
    return OPERATIONS[name](ctx, **args)


def compare(comparator: str, observed, expected, tolerance) -> bool:
    if comparator == "true":
        return observed is True
    if comparator == "eq":
        return observed == expected
    if comparator == "ge":
        return observed >= expected
    if comparator == "le":
        return observed <= expected
    if comparator == "near":
        return abs(float(observed) - float(expected)) < float(tolerance)
    raise ConfigError(f"unknown comparator {comparator!r}")


def applies(check: dict, ctx: SuiteContext) -> str | None:
    """``None`` when the check applies, else the reason it is skipped."""
    if "degrees" in check and ctx.degree not in check["degrees"]:
        return f"degree {ctx.degree} not in {check['degrees']}"
    if "families" in check and ctx.spec.family not in check["families"]:
        return f"family {ctx.spec.family} not in {check['families']}"
    if ctx.depth < check.get("min_depth", 0):
        return f"depth {ctx.depth} < {check['min_depth']}"
    if "max_order" in check:
        order = ctx.main_order
        if order is not None and order > check["max_order"]:
            return f"group order {order} > {check['max_order']}"
    return None


def run_check(check: dict, ctx: SuiteContext) -> CheckResult:
    comparator = check.get("comparator", "eq")
    tolerance = check.get("tolerance")
    expected_text = "true" if comparator == "true" else ""
    try:
        if comparator != "true":
            expected = evaluate_expected(check["expected"], ctx)
            expected_text = render(expected)
        else:
            expected = True
        observed = run_operation(check["op"], ctx, check.get("args", {}))
        passed = compare(comparator, observed, expected, tolerance)
        observed_text = render(observed)
    except CHECK_ERRORS as exc:
        passed, observed_text = False, f"error: {type(exc).__name__}: {exc}"
    return CheckResult(check["name"], expected_text, comparator, render(tolerance), observed_text, bool(passed))


# ------------------------------------------------------------------- tables


def _fpp_table(report: Report, fpp) -> None:
    report.columns = ["level", "count_fixing", "order", "p_k", "bound", "pass"]
    for row in fpp.levels:
        report.add_row([row.level, row.count_fixing, row.order, row.p_k, row.bound, row.passed])


def _log_text(vec: dict[int, int]) -> str:
    return "*".join(f"{p}^{e}" for p, e in sorted(vec.items())) or "1"


def build_table(kind: str, ctx: SuiteContext, report: Report) -> None:
    if kind == "fpp":
        _fpp_table(report, ctx.lemma_fpp if ctx.suite == "lemma-theorem" else ctx.affine_fpp)
    elif kind == "groups":
        report.columns = ["group", "order", "index_in_G", "normal_in_G", "level_transitive"]
        G, H, GH = ctx.gh
        for name, S in (("G", G), ("G_H", GH), ("H", H)):
            report.add_row([name, S.order, G.order // S.order, is_normal_subgroup(G, S),
                            all(is_level_transitive(S).values())])
    elif kind == "process":
        report.columns = ["level", "exact_mean", "sample_mean", "lower", "upper"]
        exact = burnside_means(ctx.group)[1:]
        for k, (m, (lo_, hi)) in enumerate(zip(ctx.process.means, ctx.process.mean_intervals()), start=1):
            report.add_row([k, exact[k - 1], m, float(lo_), float(hi)])
        event = ctx.process.event_rate
        report.notes.append(f"P[X_k = {ctx.process.target} for all k <= {ctx.depth}]: sampled "
                            f"{render(event.estimate)} from {event.trials} draws")
    elif kind == "hdim":
        report.columns = ["level", "log_order", "log_aut", "ratio", "exact"]
        for row in ctx.hdim.levels:
            report.add_row([row.level, _log_text(row.log_order), _log_text(row.log_aut), row.ratio, row.exact])
    else:
        raise ConfigError(f"unknown table kind {kind!r}")


# -------------------------------------------------------------------- suites


def _default_spec(suite: str, degree: int):
    if suite == "lemma-theorem":
        return LemmaSpec(degree, "G")
    if suite == "affine-unicritical":
        return AffineSpec(degree, "G")
    if suite == "gh-algebra":
        return GHSpec(LemmaSpec(degree, "G"), LemmaSpec(degree, "H"))
    if suite == "martingale":
        return LemmaSpec(degree, "G")
    return GSSpec(degree)


def make_context(suite: str, spec=None, degree: int | None = None, depth: int | None = None,
                 trials: int = DEFAULT_TRIALS, seed: int = DEFAULT_SEED, cap: int = DEFAULT_CAP) -> SuiteContext:
    suites = load_suites()
    if suite not in suites:
        raise ConfigError(f"unknown suite {suite!r}; expected one of {', '.join(suites)}")
    defaults = suites[suite]["defaults"]
    if spec is not None:
        allowed = SUITE_FAMILIES[suite]
        if allowed is not None and spec.family not in allowed:
            raise ConfigError(f"suite {suite} needs a {'/'.join(allowed)} spec, got {spec.family}")
        if degree is not None and degree != spec.degree:
            raise ConfigError(f"--degree {degree} disagrees with the config degree {spec.degree}")
        degree = spec.degree
    degree = defaults["degree"] if degree is None else degree
    depth = defaults["depth"] if depth is None else depth
    if degree < 2:
        raise ConfigError("degree must be >= 2")
    if depth < 1:
        raise ConfigError("depth must be >= 1")
    if trials < 0:
        raise ConfigError("trials must be >= 0")
    if cap <= 0:
        raise ConfigError("cap must be positive")
    spec = _default_spec(suite, degree) if spec is None else spec
    ctx = SuiteContext(suite, degree, depth, trials, seed, cap, spec)
    if suite == "hdim":
        ctx.hdim = hdim_sequence(ctx.order_at, degree, depth, spec_id=spec.family)
    return ctx


def run_suite(suite: str, ctx: SuiteContext) -> Report:
    """Run every applicable check of the suite and build its data table."""
    definition = load_suites()[suite]
    report = Report(suite, ctx.spec.echo(), ctx.seed, ctx.depth, ctx.trials, __version__, ["level"])
    for check in definition["checks"]:
        reason = applies(check, ctx)
        if reason is not None:
            report.notes.append(f"skipped '{check['name']}': {reason}")
            continue
        report.checks.append(run_check(check, ctx))
    build_table(definition["table"], ctx, report)
    report.notes.extend(ctx.notes)
    if suite == "lemma-theorem" and not ctx.lemma.checks["H normal in G"]:
        report.notes.append(f"H is not normal in G for d={ctx.degree}; the G_H construction does not apply")
    if suite == "hdim" and ctx.spec.family == "gs" and ctx.degree > 2:
        report.notes.append(f"ratio limit for this family: log d/(d log d!) = {render(gs_hdim_limit(ctx.degree))}")
    return report


# ----------------------------------------------------------------------- main


def _hex(text: str) -> int:
    try:
        return int(text, 16)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a hexadecimal seed: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treegroups", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run-suite", help="run a named experiment suite")
    run.add_argument("name", choices=sorted(SUITE_FAMILIES))
    run.add_argument("--spec", type=Path, help="GroupSpec YAML file")
    run.add_argument("--degree", type=int, help="tree degree d (when no spec is given)")
    run.add_argument("--depth", type=int, help="depth n (n_max for hdim)")
    run.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    run.add_argument("--seed", type=_hex, default=DEFAULT_SEED, help="hexadecimal seed, default 5EED")
    run.add_argument("--cap", type=int, default=DEFAULT_CAP, help="enumeration cap")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--out", type=Path, help="report path (stdout when omitted)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        spec = load_spec(args.spec) if args.spec else None
        ctx = make_context(args.name, spec, args.degree, args.depth, args.trials, args.seed, args.cap)
        report = run_suite(args.name, ctx)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    if args.out is not None:
        for path in emit_report(report, args.format, args.out):
            print(f"wrote {path}", file=sys.stderr)
    elif args.format == "json":
        sys.stdout.write(report_json(report))
    else:
        table, checks = report_csv(report)
        sys.stdout.write(table + "\n" + checks)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.check}  (observed {c.observed})", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
