"""Command-line entry point.

::

    surfelastic run CONFIG [--output DIR] [--quiet]
    surfelastic verify [--samples N] [--seed S]
    surfelastic generate {cook,nanowire,bridge,rough-plate} [--out DIR] [--refine K] [--ratio R]

Exit codes: 0 success, 1 solver or physics failure (diagnostic as one JSON
line on stderr), 2 usage or parameter-file error.
"""

import argparse
import json
import os
import sys

from .errors import ConfigError, SurfelasticError

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


def build_parser():
    from .benchmarks import BENCHMARKS

    p = argparse.ArgumentParser(prog="surfelastic", description="Finite elasticity with energetic surfaces.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="solve the problem described by a parameter file")
    r.add_argument("config", help="parameter file (.prm)")
    r.add_argument("--output", help="output directory (overrides the parameter file)")
    r.add_argument("--quiet", action="store_true", help="suppress convergence tables")

    v = sub.add_parser("verify", help="run the tangent and kinematics self-checks")
    v.add_argument("--samples", type=int, default=100, help="random states per suite (default 100)")
    v.add_argument("--seed", type=int, default=0)

    g = sub.add_parser("generate", help="write mesh and parameter file of a benchmark")
    g.add_argument("benchmark", choices=sorted(BENCHMARKS))
    g.add_argument("--out", default=".", help="target directory (default: current)")
    g.add_argument("--refine", type=int, default=0, help="uniform refinement levels (cook, bridge)")
    g.add_argument("--ratio", type=float, default=None, help="surface/volume modulus ratio (cook, nanowire, rough-plate)")
    return p


def _fail(exc):
    info = {"error": type(exc).__name__, "message": str(exc)}
    if hasattr(exc, "as_dict"):
        info.update(exc.as_dict())
        info["error"] = type(exc).__name__
    if getattr(exc, "history", None):
        info["history"] = [json.loads(h.to_json()) for h in exc.history]
    print(f"error: {exc}", file=sys.stderr)
    print(json.dumps(info), file=sys.stderr)


def _cmd_run(args):
    from .driver import run
    from .io.config import parse_config

    cfg = parse_config(args.config)
    run(cfg, out=None if args.quiet else sys.stdout, output_dir=args.output)
    return EXIT_OK


def _cmd_verify(args):
    from .verification import run_all

    results = run_all(args.samples, args.seed)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} suites passed")
    return EXIT_OK if failed == 0 else EXIT_FAILURE


def _cmd_generate(args):
    from .benchmarks import BENCHMARKS
    from .driver import build_triangulation
    from .io.config import serialize_config
    from .io.mesh_io import write_mesh

    factory = BENCHMARKS[args.benchmark]
    kwargs = {}
    if args.refine:
        if args.benchmark not in ("cook", "bridge"):
            raise ConfigError(f"--refine is not supported for {args.benchmark}")
        kwargs["refine"] = args.refine
    if args.ratio is not None:
        if args.benchmark == "bridge":
            raise ConfigError("--ratio is not supported for bridge")
        kwargs["ratio"] = args.ratio
    cfg = factory(**kwargs)
    tri = build_triangulation(cfg)
    os.makedirs(args.out, exist_ok=True)
    stem = args.benchmark
    mesh_path = os.path.join(args.out, f"{stem}.mesh")
    write_mesh(mesh_path, tri)
    cfg.mesh.file = f"{stem}.mesh"
    cfg.mesh.generator = None
    cfg.mesh.parameters = {}
    prm_path = os.path.join(args.out, f"{stem}.prm")
    with open(prm_path, "w") as fh:
        fh.write(f"# {stem} benchmark ({tri.n_cells} cells, {tri.n_vertices} vertices)\n")
        fh.write(serialize_config(cfg))
    print(f"wrote {mesh_path}\nwrote {prm_path}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    handler = {"run": _cmd_run, "verify": _cmd_verify, "generate": _cmd_generate}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        _fail(exc)
        return EXIT_USAGE
    except (SurfelasticError, ValueError) as exc:
        _fail(exc)
        return EXIT_FAILURE
    except OSError as exc:
        _fail(exc)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
