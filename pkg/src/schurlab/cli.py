"""Command-line entry point: ``schurlab <command> --input a.json ...``.

Exit status is 0 on success, 1 for bad input and 2 when a computed result
violates one of its invariants (e.g. a reconstruction residual too large).
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .errors import InvalidInputError, InvariantViolation, NumericFailure
from .gaps import Subspace, gap, semigap
from .jordan import CLUSTER_TOL, gk_profile
from .linalg import RANK_TOL, operator_norm
from .schur import schur_decompose, verify_schur
from .stability import forward_demo, holder_ratio, measure_backward

log = logging.getLogger("schurlab")

COMMANDS = ("schur", "gk", "gap", "backward", "forward-demo", "eig-holder")
SCHUR_TOL = 1e-8
FORWARD_RANK_TOL = 1e-12


@dataclass
class RunConfig:
    command: str
    input: Path | None = None
    input2: Path | None = None
    eps_decades: list = field(default_factory=lambda: [1e-3, 1e-5, 1e-7, 1e-9])
    trials: int = 20
    seed: int = 0
    rank_tol: float | None = None
    cluster_tol: float = CLUSTER_TOL
    out: Path | None = None
    format: str | None = None
    order: str = "first-diagonal"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InvalidInputError(f"unknown command {self.command!r}")
        eps = self.eps_decades
        if not eps or any(e <= 0 for e in eps) or any(a <= b for a, b in zip(eps, eps[1:])):
            raise InvalidInputError("--decades must be positive and strictly decreasing")
        if self.trials < 0:
            raise InvalidInputError("--trials must be non-negative")
        if (self.rank_tol is not None and self.rank_tol <= 0) or self.cluster_tol <= 0:
            raise InvalidInputError("tolerances must be positive")


def _decades(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # Usage mistakes are input errors (status 1), not argparse's 2.
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="schurlab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", type=Path, help="matrix JSON (A0, A, or first subspace)")
    p.add_argument("--input2", type=Path, help="second matrix/subspace JSON")
    p.add_argument("--decades", type=_decades, default=[1e-3, 1e-5, 1e-7, 1e-9],
                   help="comma-separated, strictly decreasing epsilons")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rank-tol", type=float,
                   help=f"relative rank threshold (default {RANK_TOL:g}; 1e-12 for forward-demo)")
    p.add_argument("--cluster-tol", type=float, default=CLUSTER_TOL)
    p.add_argument("--order", choices=("first-diagonal", "descending"),
                   default="first-diagonal", help="eigenvalue order for schur")
    p.add_argument("--out", type=Path, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    return p


def _require(path, flag):
    if path is None:
        raise InvalidInputError(f"{flag} is required for this command")
    return path


def _csv_text(columns, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([f"{r[c]:.17g}" if isinstance(r[c], float) else r[c] for c in columns])
    return buf.getvalue()


def _read_subspace(path) -> Subspace:
    obj = io.load_json(path)
    if isinstance(obj, dict) and "ambient" in obj:
        return io.subspace_from_json(obj, where=str(path))
    return Subspace.span(io.matrix_from_json(obj, where=str(path)))


def _run_schur(cfg):
    a = io.parse_matrix_file(_require(cfg.input, "--input"))
    s = schur_decompose(a, cfg.order)
    defect = verify_schur(a, s)
    payload = io.schur_to_json(s)
    payload["diagonal"] = [[z.real, z.imag] for z in s.diagonal]
    payload["defect"] = defect
    if defect > SCHUR_TOL * max(1.0, operator_norm(a)):
        raise InvariantViolation(f"Schur factorization defect {defect:.3g}", payload)
    return "json", io.dumps(payload)


def _run_gk(cfg):
    a = io.parse_matrix_file(_require(cfg.input, "--input"))
    p = gk_profile(a, cfg.cluster_tol, cfg.rank_tol or RANK_TOL)
    payload = io.gk_to_json(p)
    payload["uncertain"] = p.uncertain
    return "json", io.dumps(payload)


def _run_gap(cfg):
    m = _read_subspace(_require(cfg.input, "--input"))
    n = _read_subspace(_require(cfg.input2, "--input2"))
    payload = {
        "dim_m": m.dim,
        "dim_n": n.dim,
        "gap": gap(m, n),
        "semigap_mn": semigap(m, n),
        "semigap_nm": semigap(n, m),
    }
    return "json", io.dumps(payload)


def _run_backward(cfg):
    path = _require(cfg.input, "--input")
    a0 = io.parse_matrix_file(path)
    report = measure_backward(a0, cfg.eps_decades, cfg.trials, cfg.seed, matrix_id=path.stem,
                              rank_tol=cfg.rank_tol or RANK_TOL, cluster_tol=cfg.cluster_tol)
    bad = report.violations()
    text = report.to_csv() if cfg.format == "csv" else report.to_json()
    if bad:
        raise InvariantViolation(f"{len(bad)} reconstruction(s) exceed the residual bound",
                                 text)
    return "csv", text


def _run_forward(cfg):
    j0 = io.parse_matrix_file(_require(cfg.input, "--input"))
    p0 = (io.parse_matrix_file(cfg.input2) if cfg.input2 is not None
          else np.eye(j0.shape[0]))
    rows = forward_demo(p0, j0, cfg.eps_decades, rank_tol=cfg.rank_tol or FORWARD_RANK_TOL)
    if cfg.format == "json":
        return "json", io.dumps(rows)
    for r in rows:
        r["gk_m0"] = " ".join(map(str, r["gk_m0"]))
        r["gk_m"] = " ".join(map(str, r["gk_m"]))
    cols = ("epsilon", "norm_diff", "lower_bound", "gk_m0", "gk_m", "gk_differs")
    return "csv", _csv_text(cols, rows)


def _run_holder(cfg):
    a0 = io.parse_matrix_file(_require(cfg.input, "--input"))
    a = io.parse_matrix_file(_require(cfg.input2, "--input2"))
    r = holder_ratio(a0, a, cfg.cluster_tol)
    row = {"matched_dist": r.matched_dist, "norm_diff": r.norm_diff,
           "ratio_1n": r.ratio_1n, "ratio_1": r.ratio_1}
    if cfg.format == "csv":
        row["ratio_1"] = "" if r.ratio_1 is None else r.ratio_1
        return "csv", _csv_text(tuple(row), [row])
    return "json", io.dumps(row)


_HANDLERS = {
    "schur": _run_schur,
    "gk": _run_gk,
    "gap": _run_gap,
    "backward": _run_backward,
    "forward-demo": _run_forward,
    "eig-holder": _run_holder,
}
_CSV_CAPABLE = {"backward", "forward-demo", "eig-holder"}


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def run(cfg: RunConfig) -> int:
    """Dispatch ``cfg``; write the report; return the exit status."""
    if cfg.format == "csv" and cfg.command not in _CSV_CAPABLE:
        log.error("--format csv is not available for %s", cfg.command)
        return 1
    if cfg.format is None:
        cfg.format = "csv" if cfg.command == "backward" else "json"
    try:
        _, text = _HANDLERS[cfg.command](cfg)
    except InvariantViolation as exc:
        log.error("invariant violation: %s", exc.args[0])
        if len(exc.args) > 1 and isinstance(exc.args[1], str):
            _emit(exc.args[1], cfg.out)
        elif len(exc.args) > 1:
            _emit(io.dumps(exc.args[1]), cfg.out)
        return 2
    except NumericFailure as exc:
        log.error("numeric failure: %s", exc)
        return 2
    except InvalidInputError as exc:
        log.error("input error: %s", exc)
        return 1
    _emit(text, cfg.out)
    return 0


def _configure_logging():
    level = os.environ.get("SCHURLAB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(command=args.command, input=args.input, input2=args.input2,
                        eps_decades=args.decades, trials=args.trials, seed=args.seed,
                        rank_tol=args.rank_tol, cluster_tol=args.cluster_tol,
                        out=args.out, format=args.format, order=args.order)
    except InvalidInputError as exc:
        log.error("input error: %s", exc)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
