"""Command line interface.

Exit codes: 0 success, 1 domain error (bad config, resonance, failed check),
2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys

import numpy as np

from .config import load_config_file
from .diagnostics import run_checks
from .errors import DeltaLoopsError
from .field import eval_sample
from .pipeline import build_state, run_trace
from .single_center import alpha_over_k_threshold, kappa_threshold, ring_geometry
from .tracer import tangent_and_conditioning, trace_all
from .vortex import vortex_report


def _sci(x, digits=3):
    """``2.679e-2`` style (no zero-padded exponent)."""
    m, e = f"{x:.{digits}e}".split("e")
    return f"{m}e{int(e)}"


def _cplx(z):
    return f"{z.real:+.10g}{z.imag:+.10g}j"


def _vec(v):
    return "(" + ", ".join(f"{x:.10g}" for x in v) + ")"


def _point(text):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y,z but got {text!r}")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z but got {text!r}")
    return np.array(parts)


def cmd_trace(args):
    config = load_config_file(args.config)
    archive, paths = run_trace(config, args.output_dir)
    closed = sum(lp.closed for lp in archive.loops)
    print(f"loops: {len(archive.loops)} ({closed} closed)")
    for i, lp in enumerate(archive.loops):
        print(f"  loop {i}: {len(lp)} vertices, length {lp.length:.6g}, "
              f"{'closed' if lp.closed else 'open'}, crossings {len(lp.crossing_markers)}")
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_field(args):
    config = load_config_file(args.config)
    state = build_state(config)
    s = eval_sample(state, args.at)
    print(f"psi  = {_cplx(s.psi)}")
    print("grad = (" + ", ".join(_cplx(g) for g in s.grad) + ")")
    print(f"rho  = {s.rho:.10g}")
    print(f"j    = {_vec(s.current)}")
    print("v    = " + (_vec(s.velocity) if s.velocity is not None else "undefined (on the nodal set)"))
    return 0


def cmd_single_center(args):
    alpha, k = args.alpha, args.k
    if not k > 0:
        raise DeltaLoopsError(f"k must be positive, got {k}")
    bound = alpha_over_k_threshold()
    ring = ring_geometry(alpha, k)
    if ring is None:
        print(f"no nodal ring (alpha/k = {alpha / k:g} > {_sci(bound)})")
    else:
        kappa = "inf" if math.isinf(ring.kappa) else f"{ring.kappa:.6g}"
        print(f"distance {ring.distance:.6g}")
        print(f"axial_x  {ring.axial_x:.6g}")
        print(f"radius   {ring.radius:.6g}")
        print(f"gamma    {ring.gamma:.6g}")
        print(f"kappa    {kappa}")
        print(f"branch   {ring.branch_n}")
    print(f"threshold: kappa* = {kappa_threshold():.10g}, rings for alpha > 0 need alpha/k < {_sci(bound)}")
    return 0


def cmd_winding(args):
    config = load_config_file(args.config)
    state = build_state(config)
    loops = trace_all(state, config.trace)
    if not 0 <= args.loop < len(loops):
        raise DeltaLoopsError(f"loop {args.loop} out of range ({len(loops)} loops traced)")
    lp = loops[args.loop]
    if not 0 <= args.vertex < len(lp):
        raise DeltaLoopsError(f"vertex {args.vertex} out of range ({len(lp)} vertices)")
    x = lp.vertices[args.vertex]
    t, _ = tangent_and_conditioning(state, x)
    rep = vortex_report(state, x, t, args.radius, args.samples)
    print(f"point        {_vec(x)}")
    print(f"tangent      {_vec(t)}")
    print(f"winding      {rep.winding}")
    print(f"circulation  {rep.circulation:.10g}  (2*pi*W = {2 * math.pi * rep.winding:.10g})")
    for m, c in sorted(rep.c_abs.items()):
        print(f"|c_{m:+d}|       {c:.6g}")
    return 0


def cmd_check(args):
    config = load_config_file(args.config)
    state = build_state(config)
    rng = np.random.default_rng(args.seed)
    results = run_checks(state, rng, config.trace.bounds, n_points=args.points)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser():
    p = argparse.ArgumentParser(prog="deltaloops", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("trace", help="trace nodal loops and write exports")
    s.add_argument("config")
    s.add_argument("--output-dir")
    s.set_defaults(func=cmd_trace)

    s = sub.add_parser("field", help="evaluate psi, grad psi, j and v at a point")
    s.add_argument("config")
    s.add_argument("--at", type=_point, required=True, metavar="X,Y,Z")
    s.set_defaults(func=cmd_field)

    s = sub.add_parser("single-center", help="closed-form ring of one point interaction")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--k", type=float, required=True)
    s.set_defaults(func=cmd_single_center)

    s = sub.add_parser("winding", help="winding and circulation around a loop vertex")
    s.add_argument("config")
    s.add_argument("--loop", type=int, required=True)
    s.add_argument("--vertex", type=int, required=True)
    s.add_argument("--radius", type=float, required=True)
    s.add_argument("--samples", type=int, default=720)
    s.set_defaults(func=cmd_winding)

    s = sub.add_parser("check", help="run the field diagnostic suite")
    s.add_argument("config")
    s.add_argument("--points", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_check)
    return p


def _glue_negative_values(argv):
    """Let ``--at -1,0,0`` through: argparse would read ``-1,0,0`` as an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--at":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--at={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DeltaLoopsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
