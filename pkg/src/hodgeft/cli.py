"""Command-line front end.

Exit codes: 0 when every requested check passes, 1 on a check failure,
2 on an input error.  Outputs are deterministic: identical inputs, window
and seed give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

from . import __version__
from .frobenius import AlgebraError, HodgeAlgebra, check_axioms, trivial_algebra
from .givental import (RMatrixSeries, exp_op_apply, gminus_z_check, hodge_potential,
                       q_closed_check, tft_potential, PointPotential,
                       TftPotential)
from .graphs import a_coefficient, enumerate_graphs, graph_sum_potential, p_coefficient
from .series import (LogPotential, TruncationWindow, UnknownCoefficient, format_line,
                     tabulate)
from . import verify as V

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

CHECKS = ("string", "dilaton", "trr0", "3g2", "equivalence",
          "givental-invariance", "q-closed", "gminus-z")


class InputError(Exception):
    """Unreadable or invalid input; maps to exit code 2."""


@dataclass
class RunConfig:
    command: str
    inputs: List[str]
    window: TruncationWindow
    seed: Optional[int] = None
    output: Optional[str] = None
    jobs: int = 1
    options: dict = field(default_factory=dict)


# input ---------------------------------------------------------------------------


def load_algebra(path: str) -> HodgeAlgebra:
    try:
        return HodgeAlgebra.load(path)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except AlgebraError as exc:
        raise InputError(str(exc)) from None


def load_potential(path: str, window: Optional[TruncationWindow] = None):
    """Read a potential file; the header supplies parity and window."""
    try:
        with open(path) as fh:
            text = fh.read()
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    header = {}
    for line in text.splitlines():
        if line.startswith("# ") and ":" in line:
            k, v = line[2:].split(":", 1)
            header[k.strip()] = v.strip()
    try:
        parity = [int(x) for x in header["parity"].split(",")]
        w = dict(item.split("=") for item in header["window"].split())
        stored = TruncationWindow(int(w["g_max"]), int(w["n_max"]), int(w["d_max"]))
        indices = [int(x) - 1 for x in header["indices"].split(",")]
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: missing or bad header field ({exc})") from None
    try:
        F = LogPotential.parse(text, stored, parity)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if window is not None:
        if (window.g_max > stored.g_max or window.n_max > stored.n_max
                or window.d_max > stored.d_max):
            raise InputError(f"{path}: requested window {window} exceeds stored {stored}")
        F = F.restrict(window)
    return F, indices, header


def load_r_matrix(path: str, algebra: HodgeAlgebra) -> RMatrixSeries:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return RMatrixSeries.from_json(algebra, data)
    except AlgebraError as exc:
        raise InputError(f"{path}: {exc}") from None


# output --------------------------------------------------------------------------


def header(cfg: RunConfig, algebra_tag: str, parity, indices) -> List[str]:
    w = cfg.window
    return [
        f"# hodgeft {__version__}: {cfg.command}",
        f"# window: g_max={w.g_max} n_max={w.n_max} d_max={w.d_max}",
        f"# seed: {'none' if cfg.seed is None else cfg.seed}",
        f"# algebra: {algebra_tag}",
        f"# parity: {','.join(str(p) for p in parity)}",
        f"# indices: {','.join(str(i + 1) for i in indices)}",
    ]


def algebra_tag(A: HodgeAlgebra) -> str:
    return f"{A.name} sha256:{A.content_hash()}"


def potential_text(cfg, tag, F: LogPotential, indices) -> str:
    lines = header(cfg, tag, F.parity, indices)
    lines.extend(format_line(g, key, v) for (g, key), v in F.items())
    return "\n".join(lines) + "\n"


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def emit(cfg: RunConfig, text: str):
    with _sink(cfg.output) as fh:
        fh.write(text)


@contextmanager
def _mapper(jobs: int):
    if jobs <= 1:
        yield map
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            yield lambda f, xs: pool.map(f, xs, chunksize=4)


def _require_axioms(A: HodgeAlgebra):
    rep = check_axioms(A)
    if not rep.passed:
        print(f"axioms fail for {A.name}; nothing computed", file=sys.stderr)
        for line in rep.lines():
            print(line, file=sys.stderr)
        return False
    return True


# commands ------------------------------------------------------------------------


def cmd_check_axioms(cfg: RunConfig) -> int:
    A = load_algebra(cfg.inputs[0])
    rep = check_axioms(A)
    emit(cfg, "\n".join([f"# algebra: {algebra_tag(A)}"] + list(rep.lines())) + "\n")
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_psi_table(cfg: RunConfig) -> int:
    F = tabulate(PointPotential(), cfg.window)
    emit(cfg, potential_text(cfg, "point", F, [0]))
    return EXIT_PASS


def cmd_list_graphs(cfg: RunConfig) -> int:
    g = cfg.options["genus"]
    d = cfg.options["degrees"]
    lines = [f"# graphs of genus {g} with leaf degrees {','.join(map(str, d)) or '-'}"]
    try:
        graphs = enumerate_graphs(g, d)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    for G in graphs:
        lines.append(f"{G.describe()} | A={a_coefficient(G)} P={p_coefficient(G)}")
    lines.append(f"# {len(graphs)} graphs")
    emit(cfg, "\n".join(lines) + "\n")
    return EXIT_PASS


def cmd_build_tft(cfg: RunConfig) -> int:
    A = load_algebra(cfg.inputs[0])
    if not _require_axioms(A):
        return EXIT_FAIL
    F = tft_potential(A, cfg.window)
    emit(cfg, potential_text(cfg, algebra_tag(A), F, range(A.s)))
    return EXIT_PASS


def build_potential(A: HodgeAlgebra, window, method: str, jobs: int = 1) -> LogPotential:
    if method == "graph":
        with _mapper(jobs) as mapper:
            return graph_sum_potential(A, window, mapper=mapper)
    return hodge_potential(A, window)


def cmd_build_potential(cfg: RunConfig) -> int:
    A = load_algebra(cfg.inputs[0])
    if not _require_axioms(A):
        return EXIT_FAIL
    F = build_potential(A, cfg.window, cfg.options["method"], cfg.jobs)
    emit(cfg, potential_text(cfg, algebra_tag(A), F, A.h0_indices()))
    return EXIT_PASS


def _algebra_for(F, opt_path):
    if opt_path:
        return load_algebra(opt_path)
    if F.rank == 1:
        return trivial_algebra()
    raise InputError("--algebra is required for potentials of rank > 1")


def _r_matrix(cfg, A):
    if cfg.options.get("r_matrix"):
        return load_r_matrix(cfg.options["r_matrix"], A)
    seed = 0 if cfg.seed is None else cfg.seed
    cfg.seed = seed
    return RMatrixSeries.random(A, seed)


def load_source(path: str, window: TruncationWindow):
    """A potential to act on: ``point``, an algebra file (its TFT potential,
    exact at every key) or a stored table.  Returns (F, indices, tag, algebra)."""
    if path == "point":
        return PointPotential(), [0], "point", trivial_algebra()
    if path.endswith(".json"):
        A = load_algebra(path)
        if not _require_axioms(A):
            raise InputError(f"{path}: axioms fail")
        return TftPotential(A), list(range(A.s)), algebra_tag(A), A
    F, indices, head = load_potential(path)
    return F, indices, head.get("algebra", "unknown"), None


def _act(R, F, window, indices):
    try:
        return exp_op_apply(R, F, window, indices)
    except UnknownCoefficient as exc:
        raise InputError(f"the stored table does not determine the image in {window}: "
                         f"{exc}; store a larger window or act on an exact source") from None


def cmd_apply_givental(cfg: RunConfig) -> int:
    F, indices, tag, A = load_source(cfg.inputs[0], cfg.window)
    A = A or _algebra_for(F, cfg.options.get("algebra"))
    R = _r_matrix(cfg, A)
    out = _act(R, F, cfg.window, indices)
    emit(cfg, potential_text(cfg, tag, out, indices))
    return EXIT_PASS


def _report_text(cfg, tag, reports) -> str:
    lines = header(cfg, tag, [], [])[:4]
    for rep in reports:
        lines.extend(rep.lines())
    return "\n".join(lines) + "\n"


def cmd_verify(cfg: RunConfig) -> int:
    check = cfg.options["check"]
    path = cfg.inputs[0]
    if check in ("equivalence", "q-closed", "gminus-z"):
        A = load_algebra(path)
        if not _require_axioms(A):
            return EXIT_FAIL
        tag = algebra_tag(A)
        if check == "equivalence":
            with _mapper(cfg.jobs) as mapper:
                reports = [V.check_equivalence(A, cfg.window, mapper=mapper)]
        else:
            fn = q_closed_check if check == "q-closed" else gminus_z_check
            ok, bad = fn(A, cfg.window)
            rep = V.CheckReport(check, checked=1)
            if not ok:
                g, key, value = bad
                rep.failures.append((g, key, value, Fraction(0)))
            reports = [rep]
    elif check == "givental-invariance":
        F, indices, tag, A = load_source(path, cfg.window)
        A = A or _algebra_for(F, cfg.options.get("algebra"))
        R = _r_matrix(cfg, A)
        try:
            reports = [V.check_givental_invariance(F, R, cfg.window, indices)]
        except UnknownCoefficient as exc:
            raise InputError(f"the stored table does not determine the image: {exc}") from None
    else:
        F, indices, head = load_potential(path, cfg.window)
        tag = head.get("algebra", "unknown")
        if check == "3g2":
            reports = [V.check_3g2(F)]
        elif check == "dilaton":
            reports = [V.check_dilaton(F, indices=indices)]
        else:
            A = _algebra_for(F, cfg.options.get("algebra"))
            if check == "string":
                reports = [V.check_string(F, A.eta, indices=indices)]
            elif check == "trr0":
                reports = [V.check_trr0(F, A.eta, indices=indices)]
            else:
                raise InputError("givental-invariance needs an exact source")
    emit(cfg, _report_text(cfg, tag, reports))
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


COMMANDS = {
    "check-axioms": cmd_check_axioms,
    "psi-table": cmd_psi_table,
    "list-graphs": cmd_list_graphs,
    "build-tft": cmd_build_tft,
    "build-potential": cmd_build_potential,
    "apply-givental": cmd_apply_givental,
    "verify": cmd_verify,
}


# argument parsing ----------------------------------------------------------------


def _positive(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--g-max", type=_positive, default=2)
    common.add_argument("--n-max", type=_positive, default=6)
    common.add_argument("--d-max", type=_positive, default=4)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("-o", "--output", default=None)
    common.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = argparse.ArgumentParser(prog="hodgeft", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-axioms", parents=[common], help="validate an algebra file")
    s.add_argument("algebra")
    sub.add_parser("psi-table", parents=[common], help="psi intersection numbers")
    s = sub.add_parser("list-graphs", parents=[common], help="decorated stable graphs")
    s.add_argument("genus", type=_positive)
    s.add_argument("degrees", nargs="?", default="")
    s = sub.add_parser("build-tft", parents=[common], help="the TFT potential")
    s.add_argument("algebra")
    s = sub.add_parser("build-potential", parents=[common], help="the potential on H0")
    s.add_argument("algebra")
    s.add_argument("--method", choices=("graph", "givental"), default="givental")
    s = sub.add_parser("apply-givental", parents=[common], help="R-matrix action")
    s.add_argument("potential", help="'point', an algebra file, or a potential file")
    s.add_argument("--r-matrix", default=None)
    s.add_argument("--algebra", default=None)
    s = sub.add_parser("verify", parents=[common], help="run one check")
    s.add_argument("check", choices=CHECKS)
    s.add_argument("file")
    s.add_argument("--r-matrix", default=None)
    s.add_argument("--algebra", default=None)
    return p


def config_from_args(args) -> RunConfig:
    window = TruncationWindow(args.g_max, args.n_max, args.d_max)
    inputs, options = [], {}
    if args.command in ("check-axioms", "build-tft", "build-potential"):
        inputs = [args.algebra]
    if args.command == "build-potential":
        options["method"] = args.method
    if args.command == "list-graphs":
        try:
            degrees = tuple(int(x) for x in args.degrees.split(",") if x.strip())
        except ValueError:
            raise InputError(f"bad degree list {args.degrees!r}") from None
        options.update(genus=args.genus, degrees=degrees)
    if args.command == "apply-givental":
        inputs = [args.potential]
    if args.command == "verify":
        inputs = [args.file]
        options["check"] = args.check
    for name in ("r_matrix", "algebra"):
        if getattr(args, name, None) and args.command in ("apply-givental", "verify"):
            options[name] = getattr(args, name)
    return RunConfig(args.command, inputs, window, args.seed, args.output,
                     max(1, args.jobs), options)


def run(cfg: RunConfig) -> int:
    try:
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    try:
        cfg = config_from_args(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
