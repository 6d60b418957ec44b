"""Batch command line front end.

    biangle gram       --alpha A --beta B --gamma G --degrees 0..8
    biangle kernels    ...                  reproduction residuals
    biangle identities ...                  transform / decomposition / operator checks
    biangle lebesgue   ... --degrees 8,16,32,64
    biangle converge   ... --function absx|exp|poly --p 2
    biangle meancheck  --alpha A --beta B --p 2

Reports are CSV (17 significant digits, header row) or JSON
({"columns": [...], "rows": [[...], ...]}) with the same fields.
Exit codes: 0 success, 1 usage error, 2 a tolerance check failed,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    ConditioningError,
    ContractError,
    DomainError,
    IndexRangeError,
    NumericError,
    ParameterDomainError,
    ResolutionError,
    ToleranceError,
    UnsupportedParameterError,
)
from .expand import (
    WeightTriple,
    check_decomposition,
    convergence_table,
    lebesgue_2d,
    mean_convergence_check,
    mean_convergence_interval,
)
from .geometry import orbit4, sym_map
from .koornwinder import (
    BiangleParams,
    basis_orthonormal,
    kernel_minus,
    kernel_plus,
    lowering_deviation,
    monic_basis,
    monomial_index,
    product_form_deviation,
    quadratic_transform_deviation,
)
from .opoly1d import JacobiPair, WeightSpec1D, lebesgue_1d
from .quadrature import omega_rule_jacobi, square_rule
from .squarefam import basis_Q, check_Q_transform, kernel_CK, kernel_CK_sum, q_basis_list

COMMANDS = ("gram", "kernels", "identities", "lebesgue", "converge", "meancheck")

EXIT_OK, EXIT_USAGE, EXIT_ASSERT, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = -0.5
    degrees: list = field(default_factory=lambda: list(range(9)))
    grid: int | None = None
    tol: float = 1e-9
    output: str | None = None
    format: str = "csv"
    seed: int = 0
    function: str = "absx"
    p_norm: float = 2.0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ParameterDomainError(f"unknown command {self.command!r}")
        if not self.tol > 0:
            raise ParameterDomainError("tol must be positive")
        if self.format not in ("csv", "json"):
            raise ParameterDomainError("format is csv or json")
        if self.command in ("kernels", "identities", "lebesgue", "converge") and self.gamma not in (-0.5, 0.5):
            raise ParameterDomainError("kernel and expansion commands need gamma = ±1/2")
        if self.command in ("lebesgue", "converge") and self.gamma != -0.5:
            raise ParameterDomainError("lebesgue and converge need gamma = -1/2")
        if any(d < 0 for d in self.degrees):
            raise ParameterDomainError("degrees must be nonnegative")

    @property
    def params(self) -> BiangleParams:
        return BiangleParams(self.alpha, self.beta, self.gamma)


@dataclass
class Report:
    columns: list
    rows: list
    failed: bool = False


def parse_degrees(text: str) -> list[int]:
    """"0..8" -> 0,...,8; "8,16" -> 8, 16; pieces may be mixed."""
    out: list[int] = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if ".." in piece:
            lo, hi = piece.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(piece))
    if not out:
        raise ValueError("empty degree list")
    return out


# -- formatting ------------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating, Fraction)):
        return "%.17g" % float(v)
    return str(v)


def _json_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating, Fraction)):
        f = float(v)
        return f if math.isfinite(f) else _cell(f)
    return v


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        payload = {"columns": report.columns, "rows": [[_json_cell(v) for v in r] for r in report.rows]}
        return json.dumps(payload, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.columns)
    for r in report.rows:
        writer.writerow([_cell(v) for v in r])
    return buf.getvalue()


# -- commands ------------------------------------------------------------------------------

def _gram_dev(G: np.ndarray) -> tuple[float, float]:
    off = G - np.diag(np.diag(G))
    return float(np.abs(off).max()) if G.size > 1 else 0.0, float(np.abs(np.diag(G) - 1).max())


def _omega_values(p: BiangleParams, n: int, u, v) -> np.ndarray:
    if p.explicit:
        return np.array([basis_orthonormal(p, k, m, u, v) for k, m in monomial_index(n)])
    mb = monic_basis(p, n)
    vals = np.array([mb(k, m, u, v) for k, m in monomial_index(n)])
    return vals / np.sqrt(mb.norms_sq)[:, None]


def cmd_gram(cfg: RunConfig) -> Report:
    p = cfg.params
    rows = []
    failed = False
    for n in cfg.degrees:
        rule = omega_rule_jacobi(p.alpha, p.beta, p.gamma, 2 * n)
        V = _omega_values(p, n, *rule.points)
        off, diag = _gram_dev((V * rule.weights) @ V.T)
        ok = max(off, diag) < cfg.tol
        failed |= not ok
        rows.append(["omega", "all", n, off, diag, ok])
        srule = square_rule(p, 2 * n)
        idx = q_basis_list(n)
        pts = orbit4(*srule.points)
        Q = np.array([np.concatenate([basis_Q(p, q, a, b) for a, b in pts]) for q in idx])
        if not p.explicit:
            Q = Q / np.sqrt(np.einsum("ij,j,ij->i", Q, np.tile(srule.weights / 4, 4), Q))[:, None]
        G = (Q * np.tile(srule.weights / 4, 4)) @ Q.T
        fams = sorted({q.family for q in idx})
        for fam in fams + ["all"]:
            sel = [k for k, q in enumerate(idx) if fam == "all" or q.family == fam]
            off, diag = _gram_dev(G[np.ix_(sel, sel)])
            ok = max(off, diag) < cfg.tol
            failed |= not ok
            rows.append(["square", fam, n, off, diag, ok])
    return Report(["domain", "family", "max_degree", "max_offdiag", "max_diag_dev", "passed"], rows, failed)


def _random_poly(rng, n):
    c = rng.normal(size=(n + 1, n + 1))

    def f(x, y):
        return sum(c[a, b] * x**a * y**b for a in range(n + 1) for b in range(n + 1 - a))

    return f


def cmd_kernels(cfg: RunConfig) -> Report:
    p = cfg.params
    rng = np.random.default_rng(cfg.seed)
    t = p.table(max(cfg.degrees) + 4)
    kern = kernel_minus if p.gamma == -0.5 else kernel_plus
    rows = []
    failed = False
    for n in cfg.degrees:
        rule = omega_rule_jacobi(p.alpha, p.beta, p.gamma, 2 * n)
        worst = 0.0
        for _ in range(20):
            f = _random_poly(rng, n)
            a, b = np.sort(rng.uniform(-1, 1, 2))
            z = sym_map(a, b)
            K = kern(t, n, (np.full_like(rule.points[0], z[0]), np.full_like(rule.points[0], z[1])), rule.points)
            approx = float(np.dot(rule.weights, K * f(*rule.points)))
            worst = max(worst, abs(approx - float(f(*z))))
        ok = worst < cfg.tol
        failed |= not ok
        rows.append(["omega", n, worst, float("nan"), ok])
        worst = 0.0
        srule = square_rule(p, 2 * n)
        for _ in range(20):
            f = _random_poly(rng, n)
            x = rng.uniform(-1, 1, 2)
            acc = 0.0
            for a, b in orbit4(*srule.points):
                acc += np.dot(srule.weights, kernel_CK(p, n, (x[0], x[1]), (a, b)) * f(a, b))
            worst = max(worst, abs(acc / 4 - float(f(*x))))
        X = rng.uniform(-1, 1, (4, 50))
        vs_sum = float(np.abs(kernel_CK(p, n, X[:2], X[2:]) - kernel_CK_sum(p, n, X[:2], X[2:])).max())
        ok = worst < cfg.tol and vs_sum < cfg.tol
        failed |= not ok
        rows.append(["square", n, worst, vs_sum, ok])
    return Report(["domain", "n", "reproduction_residual", "kernel_vs_basis_sum", "passed"], rows, failed)


def cmd_identities(cfg: RunConfig) -> Report:
    p = cfg.params
    rows = []
    seed = cfg.seed
    top = min(max(cfg.degrees), 5)
    for a in (-0.5, 0.5):
        for g in (-0.5, 0.5):
            for n in range(top + 1):
                for k in range(n + 1):
                    dev_e = quadratic_transform_deviation(a, g, k, n, False, 20, np.random.default_rng(seed))
                    dev_o = quadratic_transform_deviation(a, g, k, n, True, 20, np.random.default_rng(seed))
                    rows.append(["quadratic_transform", f"alpha={a};gamma={g}", k, n, max(dev_e, dev_o)])
                for k in range(n // 2 + 1):
                    rows.append(["square_transform", f"alpha={a};gamma={g}", k, n,
                                 check_Q_transform(a, g, k, n, seed=seed)])
    for a in (-0.5, 0.5):
        for b in (-0.5, 0.5):
            for n in range(top + 1):
                for k in range(n + 1):
                    rows.append(["product_form", f"a={a};b={b};gamma=-0.5", k, n,
                                 product_form_deviation(a, b, -0.5, k, n, 20, np.random.default_rng(seed))])
    if p.gamma == -0.5:
        rng = np.random.default_rng(seed)
        f = _random_poly(rng, 6)
        for n in range(min(top, 4) + 1):
            rows.append(["decomposition", f"alpha={p.alpha};beta={p.beta}", 0, n,
                         check_decomposition(p, f, n, 20, seed)])
        for n in range(1, min(top, 4) + 1):
            for k in range(n + 1):
                rows.append(["lowering", f"alpha={p.alpha};beta={p.beta}", k, n,
                             lowering_deviation(p, k, n, 20, seed)])
    tol = {"lowering": 1e-4}
    out = []
    failed = False
    for r in rows:
        lim = cfg.tol if r[0] not in tol else max(cfg.tol, tol[r[0]])
        if r[0] == "lowering" and r[2] == r[3]:
            lim = max(cfg.tol, 1e-6)
        ok = r[4] < lim
        failed |= not ok
        out.append(r + [ok])
    return Report(["identity", "params", "k", "n", "deviation", "passed"], out, failed)


def _slope(ns, vals) -> float:
    return float(np.polyfit(np.log(ns), np.log(vals), 1)[0])


def cmd_lebesgue(cfg: RunConfig) -> Report:
    p = cfg.params
    rows = []
    ns = [n for n in cfg.degrees if n > 0]
    tables = {
        "1d": [lebesgue_1d(JacobiPair(p.alpha, p.beta), 0, 0, n) for n in ns],
        "omega": [lebesgue_2d("omega", p, 0, 0, n, cfg.grid) for n in ns],
        "square": [lebesgue_2d("square", p, 0, 0, n, cfg.grid) for n in ns],
    }
    for dom, vals in tables.items():
        slope = _slope(ns, vals) if len(ns) > 1 else float("nan")
        for n, v in zip(ns, vals):
            rows.append([dom, n, v, v / math.log(n) if n > 1 else float("nan"), slope])
    return Report(["domain", "n", "lebesgue", "lebesgue_over_log_n", "fit_slope"], rows)


FUNCTIONS = {
    "absx": (lambda x, y: np.abs(x), "loglog"),
    "exp": (lambda x, y: np.exp(x + y), "loglinear"),
    "poly": (lambda x, y: x**3 * y - 2 * x * y**2 + 0.5, "loglinear"),
}


def cmd_converge(cfg: RunConfig) -> Report:
    f, fit = FUNCTIONS[cfg.function]
    rep = convergence_table(cfg.params, f, cfg.p_norm, cfg.degrees, fit=fit)
    rows = [[n, e, lam, rep.fit_slope, rep.p_norm, rep.fit] for n, e, lam in zip(rep.degrees, rep.errors, rep.lebesgue)]
    return Report(["n", "error", "lebesgue", "fit_slope", "p_norm", "fit"], rows)


def cmd_meancheck(cfg: RunConfig) -> Report:
    triple = WeightTriple(WeightSpec1D.jacobi(Fraction(cfg.alpha), Fraction(cfg.beta)))
    rep = mean_convergence_check(triple, Fraction(cfg.p_norm))
    lo, hi = mean_convergence_interval(triple)
    rows = [[float(rep.p), c.point, c.name, c.exponent, c.passed, rep.verdict, lo, hi] for c in rep.conditions]
    return Report(["p", "point", "condition", "exponent", "passed", "verdict", "interval_lo", "interval_hi"], rows)


HANDLERS = {
    "gram": cmd_gram,
    "kernels": cmd_kernels,
    "identities": cmd_identities,
    "lebesgue": cmd_lebesgue,
    "converge": cmd_converge,
    "meancheck": cmd_meancheck,
}


def run(cfg: RunConfig) -> int:
    """Execute one command, write its report, and return the exit status."""
    try:
        report = HANDLERS[cfg.command](cfg)
    except (ParameterDomainError, UnsupportedParameterError, IndexRangeError, DomainError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, ResolutionError, ToleranceError, ConditioningError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = render(report, cfg.format)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_ASSERT if report.failed else EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="biangle", description="Orthogonal polynomial experiments on the parabolic biangle and the square.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--beta", type=float, default=0.0)
    ap.add_argument("--gamma", type=float, default=-0.5)
    ap.add_argument("--degrees", type=parse_degrees, default=None,
                    help='degree list, e.g. "0..8" or "8,16,32,64"')
    ap.add_argument("--grid", type=int, default=None, help="θ-grid intervals for Lebesgue scans")
    ap.add_argument("--tol", type=float, default=1e-9)
    ap.add_argument("--output", default=None, help="report path (default stdout)")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--function", choices=tuple(FUNCTIONS), default="absx")
    ap.add_argument("--p", dest="p_norm", type=float, default=2.0, help="L^p exponent")
    return ap


def _default_degrees(command: str) -> list[int]:
    if command == "lebesgue":
        return [8, 16, 32]
    if command == "converge":
        return list(range(2, 21))
    return list(range(9))


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    degrees = args.degrees if args.degrees is not None else _default_degrees(args.command)
    try:
        cfg = RunConfig(
            command=args.command, alpha=args.alpha, beta=args.beta, gamma=args.gamma,
            degrees=degrees, grid=args.grid, tol=args.tol, output=args.output,
            format=args.format, seed=args.seed, function=args.function, p_norm=args.p_norm,
        )
        cfg.params  # validates the exponents
    except (ParameterDomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
