"""Command-line front end.

Every subcommand reads a polynomial system file, writes JSON to standard
output (or ``-o``), and embeds the run configuration in its output.  With
``--pretty`` a human-readable report is printed instead.  Exit codes: 0 on
success, 1 on input errors, 2 on numerical failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .deflation import deflate_ideal
from .dualspace import DEFAULT_RANK_TOL, NotStabilizedError, multiplicity, truncated_dual_space
from .nid import DEFAULT_LOOPS, nid
from .npd import (
    NPDResult,
    dumps,
    ideal_membership,
    npd,
    npd_from_json,
    npd_to_json,
    sample_component,
    witness_to_json,
)
from .polycore import PolySyntaxError, PolySystem, format_system, parse, parse_polynomial
from .tracker import SlicingPlane, TrackerConfig, TrackingError, move_witness, solve_total_degree

log = logging.getLogger("numprimdec")


class InputError(Exception):
    """Bad command-line input or malformed file (exit code 1)."""


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    rank_tol: float = DEFAULT_RANK_TOL
    endpoint_tol: float = 1e-6
    dedup_tol: float = 1e-6
    membership_tol: float = 1e-6
    d_max: int = 1
    loops: int = DEFAULT_LOOPS
    max_steps: int = 3000
    threads: int = 1
    output: str | None = None

    def tracker(self) -> TrackerConfig:
        return TrackerConfig(
            endpoint_tol=self.endpoint_tol,
            dedup_tol=self.dedup_tol,
            max_steps=self.max_steps,
            seed=self.seed,
            threads=self.threads,
        )

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# input helpers
# ---------------------------------------------------------------------------


def parse_complex(text: str) -> complex:
    """Complex literal such as ``2``, ``-1.5``, ``1+2i``, ``3-4*i`` or ``2j``."""
    s = text.strip().replace(" ", "").replace("*i", "j").replace("*I", "j").replace("i", "j").replace("I", "j")
    try:
        return complex(s)
    except ValueError:
        raise InputError(f"cannot read complex number {text!r}") from None


def parse_point(text: str) -> np.ndarray:
    parts = [p for p in text.split(",")]
    if not text.strip() or any(not p.strip() for p in parts):
        raise InputError(f"malformed point {text!r}")
    return np.array([parse_complex(p) for p in parts], dtype=complex)


def read_system(path: str) -> PolySystem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse(text)


def read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def _c(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def fmt_complex(z: complex, digits: int = 5) -> str:
    """Rounded display form with ``digits`` significant digits."""
    re, im = float(np.real(z)), float(np.imag(z))
    scale = max(abs(re), abs(im))
    tiny = 10.0 ** (-digits) * max(scale, 1.0)
    re = 0.0 if abs(re) < tiny else re
    im = 0.0 if abs(im) < tiny else im
    if im == 0:
        return f"{re:.{digits}g}"
    if re == 0:
        return f"{im:.{digits}g}i"
    sign = "+" if im > 0 else "-"
    return f"{re:.{digits}g}{sign}{abs(im):.{digits}g}i"


def fmt_point(p) -> str:
    return "(" + ", ".join(fmt_complex(v) for v in p) + ")"


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def report(result: NPDResult) -> str:
    """Human-readable listing: one block per component."""
    if not result.components:
        return "no components\n"
    lines = []
    for i, r in enumerate(result.components, start=1):
        W = r.witness
        flags = [f for f, on in (("possibly pseudo", r.possibly_pseudo), ("possibly incomplete", W.possibly_incomplete)) if on]
        head = (
            f"component #{i}: found at order {r.first_order}, dim {W.dim_downstairs} "
            f"(upstairs {W.dim_upstairs} at order {W.order}), degree {W.degree}"
        )
        if flags:
            head += " [" + ", ".join(flags) + "]"
        lines.append(head)
        lines.append("  projections of witness points:")
        lines.extend("    " + fmt_point(p) for p in r.samples)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _load_npd(args, cfg: RunConfig) -> tuple[PolySystem, NPDResult]:
    obj = read_json(args.npd)
    if args.input:
        system = read_system(args.input)
    elif "system" in obj:
        system = parse(obj["system"])
    else:
        raise InputError("no system file given and the decomposition file does not embed one")
    try:
        return system, npd_from_json(obj, system)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _component(result: NPDResult, k: int):
    if not 1 <= k <= len(result.components):
        raise InputError(f"component {k} out of range 1..{len(result.components)}")
    return result.components[k - 1]


def cmd_deflate(args, cfg):
    system = read_system(args.input)
    dsys = deflate_ideal(system, args.order)
    out = {
        "order": dsys.order,
        "ambient_dim": dsys.ambient_dim,
        "variables": list(dsys.ext_ring.names),
        "generators": format_system(dsys.system).splitlines()[1:],
    }
    return out, format_system(dsys.system)


def cmd_dualspace(args, cfg):
    system = read_system(args.input)
    x = parse_point(args.point)
    B = truncated_dual_space(system, x, args.order, cfg.rank_tol)
    basis = [{",".join(map(str, b)): _c(c) for b, c in q.coeffs.items()} for q in B.basis]
    out = {"point": [_c(v) for v in x], "order": args.order, "dim": B.dim, "basis": basis}
    text = [f"dim D^({args.order}) at {fmt_point(x)}: {B.dim}"]
    for q in B.basis:
        text.append("  " + " + ".join(f"({fmt_complex(c)}) D^{b}" for b, c in q.coeffs.items()))
    return out, "\n".join(text)


def cmd_mult(args, cfg):
    system = read_system(args.input)
    x = parse_point(args.point)
    m = multiplicity(system, x, cfg.rank_tol, args.d_cap)
    return {"point": [_c(v) for v in x], "multiplicity": m}, str(m)


def cmd_solve(args, cfg, rng):
    system = read_system(args.input)
    if len(system) != system.n:
        raise InputError(f"solve needs a square system, got {len(system)} equations in {system.n} unknowns")
    pts = solve_total_degree(system, cfg.tracker(), rng)
    out = {"points": [[_c(v) for v in p.coords] for p in pts], "residuals": [p.residual for p in pts]}
    return out, "\n".join(fmt_point(p.coords) for p in pts) or "no solutions"


def cmd_nid(args, cfg, rng):
    system = read_system(args.input)
    ws = nid(deflate_ideal(system, args.order), cfg.tracker(), rng, cfg.loops)
    out = {"order": args.order, "components": [witness_to_json(w) for w in ws]}
    result = NPDResult([_as_record(w) for w in ws], args.order, cfg.seed)
    return out, report(result)


def _as_record(w):
    from .npd import ComponentRecord

    return ComponentRecord(w, w.order)


def cmd_npd(args, cfg, rng):
    system = read_system(args.input)
    result = npd(system, cfg.d_max, cfg.tracker(), rng, cfg.loops)
    out = npd_to_json(result)
    out["system"] = format_system(system)
    return out, report(result)


def cmd_member(args, cfg, rng):
    system, result = _load_npd(args, cfg)
    try:
        g = parse_polynomial(args.poly, system.ring)
    except PolySyntaxError as exc:
        raise InputError(f"--poly: {exc}") from None
    rep = ideal_membership(g, system, result, cfg.tracker(), cfg.rank_tol, cfg.membership_tol)
    out = {
        "verdict": rep.verdict,
        "degree": rep.degree,
        "threshold": rep.threshold,
        "residuals": list(rep.residuals),
    }
    return out, "true" if rep.verdict else "false"


def cmd_sample(args, cfg, rng):
    system, result = _load_npd(args, cfg)
    rec = _component(result, args.component)
    pts = sample_component(rec, args.count, cfg.tracker(), rng, base=system)
    return {"component": args.component, "points": [[_c(v) for v in p] for p in pts]}, "\n".join(
        fmt_point(p) for p in pts
    )


def cmd_witness_move(args, cfg, rng):
    system, result = _load_npd(args, cfg)
    W = _component(result, args.component).witness
    L = SlicingPlane.random(W.slice.codim, W.ambient_dim, rng)
    moved = move_witness(W, L, None, cfg.tracker(), rng)
    rep = NPDResult([_as_record(moved)], result.d_max, cfg.seed)
    return witness_to_json(moved), report(rep)


COMMANDS = {
    "deflate": cmd_deflate,
    "dualspace": cmd_dualspace,
    "mult": cmd_mult,
    "solve": cmd_solve,
    "nid": cmd_nid,
    "npd": cmd_npd,
    "member": cmd_member,
    "sample": cmd_sample,
    "witness-move": cmd_witness_move,
}
NEEDS_RNG = {"solve", "nid", "npd", "member", "sample", "witness-move"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", "--tol-endpoint", dest="endpoint_tol", type=float, default=1e-6)
    common.add_argument("--tol-rank", dest="rank_tol", type=float, default=DEFAULT_RANK_TOL)
    common.add_argument("--tol-dedup", dest="dedup_tol", type=float, default=1e-6)
    common.add_argument("--tol-member", dest="membership_tol", type=float, default=1e-6)
    common.add_argument("--max-steps", type=int, default=3000)
    common.add_argument("--threads", type=int, default=1, help="worker threads for path tracking (0 = one per CPU)")
    common.add_argument("--loops", type=int, default=DEFAULT_LOOPS, help="monodromy loops")
    common.add_argument("--pretty", action="store_true", help="human-readable text instead of JSON")
    common.add_argument("-o", "--output", help="write to this file instead of standard output")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="numprimdec", description="Numerical primary decomposition of polynomial ideals.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_, system_optional=False):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if system_optional:
            sp.add_argument("input", nargs="?", help="system file (defaults to the one embedded in --npd)")
        else:
            sp.add_argument("input", help="system file")
        return sp

    sp = add("deflate", "print the deflation ideal")
    sp.add_argument("--order", type=int, default=1)
    sp = add("dualspace", "truncated dual space at a point")
    sp.add_argument("--point", required=True)
    sp.add_argument("--order", type=int, default=1)
    sp = add("mult", "multiplicity of an isolated point")
    sp.add_argument("--point", required=True)
    sp.add_argument("--d-cap", type=int, default=10)
    add("solve", "all isolated solutions of a square system")
    sp = add("nid", "numerical irreducible decomposition of a deflated variety")
    sp.add_argument("--order", type=int, default=0)
    sp = add("npd", "numerical primary decomposition")
    sp.add_argument("--order-max", dest="d_max", type=int, default=1)
    sp = add("member", "ideal membership via dual spaces", system_optional=True)
    sp.add_argument("--npd", required=True)
    sp.add_argument("--poly", required=True)
    sp = add("sample", "sample points on a component", system_optional=True)
    sp.add_argument("--npd", required=True)
    sp.add_argument("--component", type=int, required=True, help="1-based component index")
    sp.add_argument("--count", type=int, default=1)
    sp = add("witness-move", "move a witness set to a random slice", system_optional=True)
    sp.add_argument("--npd", required=True)
    sp.add_argument("--component", type=int, required=True, help="1-based component index")
    return p


def run_config(args) -> RunConfig:
    return RunConfig(
        seed=args.seed,
        rank_tol=args.rank_tol,
        endpoint_tol=args.endpoint_tol,
        dedup_tol=args.dedup_tol,
        membership_tol=args.membership_tol,
        d_max=getattr(args, "d_max", 1),
        loops=args.loops,
        max_steps=args.max_steps,
        threads=args.threads,
        output=args.output,
    )


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
        cfg = run_config(args)
        if getattr(args, "count", 1) < 1:
            raise InputError("--count must be at least 1")
        fn = COMMANDS[args.command]
        if args.command in NEEDS_RNG:
            out, text = fn(args, cfg, np.random.default_rng(cfg.seed))
        else:
            out, text = fn(args, cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PolySyntaxError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return 1
    except (TrackingError, NotStabilizedError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if isinstance(out, dict) and "config" not in out:
        out = {**out, "config": cfg.to_dict()}
    payload = text.rstrip("\n") + "\n" if args.pretty else dumps(out) + "\n"
    if args.output:
        try:
            Path(args.output).write_text(payload)
        except OSError as exc:
            print(f"error: cannot write {args.output}: {exc.strerror}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
