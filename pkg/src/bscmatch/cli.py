"""Command-line entry point: extract, correspond, match, warp, classify, bench.

Exit status is 0 on success, 1 on a usage error and 2 on a data error.
"""
from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from dataclasses import replace

from .baseline import ALGORITHMS, bench_scaling, bench_svg, make_gallery
from .correspondence import (
    Direction,
    backward_correspondences,
    forward_correspondences,
    keep_all,
    prune,
    select_direction,
)
from .descriptor import ShapeContextParams, shape_cost_matrix
from .errors import BscError
from .pipeline import PipelineConfig, classify_knn, correspondence_svg, match_shapes
from .shapes import DEFAULT_THRESHOLD, extract_contours, load_pgm, read_shape, save_points

EXIT_USAGE = 1
EXIT_DATA = 2

_PIPELINE_KEYS = {
    "iterations": int,
    "lambda": float,
    "tps_sample_count": int,
    "prune": "bool",
    "otsu_bins": int,
    "max_points": int,
}
_SC_KEYS = {
    "radial_bins": int,
    "angular_bins": int,
    "r_inner": float,
    "r_outer": float,
    "rotation_invariant": "bool",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _score(x):
    return float(f"{x:.12g}")


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def load_config(path) -> PipelineConfig:
    """Read ``[pipeline]`` and ``[shape_context]`` sections of a key=value file."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if not cp.read(path):
        raise UsageError(f"cannot read config file {path}")
    extra = set(cp.sections()) - {"pipeline", "shape_context"}
    if extra:
        raise UsageError(f"unknown config section(s): {', '.join(sorted(extra))}")

    def section(name, keys):
        out = {}
        if not cp.has_section(name):
            return out
        for key, raw in cp.items(name):
            if key not in keys:
                raise UsageError(f"unknown key {key!r} in [{name}]")
            kind = keys[key]
            try:
                out[key] = cp.getboolean(name, key) if kind == "bool" else kind(raw)
            except ValueError:
                raise UsageError(f"bad value for {key!r} in [{name}]: {raw!r}") from None
        return out

    pipe = section("pipeline", _PIPELINE_KEYS)
    sc = section("shape_context", _SC_KEYS)
    try:
        params = ShapeContextParams(**sc)
        if "lambda" in pipe:
            pipe["lambda_scale"] = pipe.pop("lambda")
        return PipelineConfig(sc_params=params, **pipe)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config(args) -> PipelineConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else PipelineConfig()
    kw = {}
    if getattr(args, "iterations", None) is not None:
        kw["iterations"] = args.iterations
    if getattr(args, "lam", None) is not None:
        kw["lambda_scale"] = args.lam
    try:
        return replace(cfg, **kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _read(path, args):
    return read_shape(path, getattr(args, "threshold", DEFAULT_THRESHOLD))


# --- subcommands -------------------------------------------------------------------

def cmd_extract(args):
    with open(args.image, "rb") as fh:
        shape = extract_contours(load_pgm(fh.read()), args.threshold)
    _write(args.output, save_points(shape))


def cmd_correspond(args):
    cfg = _config(args)
    p, q = _read(args.a, args), _read(args.b, args)
    M = shape_cost_matrix(p.deduplicated(), q.deduplicated(), cfg.sc_params)
    f, b = forward_correspondences(M), backward_correspondences(M)
    summary = {
        "score": _score(0.5 * (f.average_cost + b.average_cost)),
        "forward_average_cost": _score(f.average_cost),
        "backward_average_cost": _score(b.average_cost),
    }
    if args.prune:
        pf, pb = prune(f, cfg.otsu_bins), prune(b, cfg.otsu_bins)
        direction = select_direction(pf, pb)
        chosen = pf if direction is Direction.FORWARD else pb
        doc = chosen.parent.to_json_dict(chosen)
        summary["pruned_forward_cost"] = _score(pf.pruned_average_cost)
        summary["pruned_backward_cost"] = _score(pb.pruned_average_cost)
    else:
        direction = Direction.FORWARD if f.average_cost <= b.average_cost else Direction.BACKWARD
        cs = f if direction is Direction.FORWARD else b
        chosen = keep_all(cs)
        doc = cs.to_json_dict()
    summary["direction"] = direction.value
    if args.json:
        _write(args.json, json.dumps(doc) + "\n")
    if args.svg:
        _write(args.svg, correspondence_svg(p.deduplicated(), q.deduplicated(), chosen))
    print(json.dumps(summary))


def cmd_match(args):
    cfg = _config(args)
    res = match_shapes(_read(args.a, args), _read(args.b, args), cfg)
    if args.json:
        _write(args.json, res.to_json() + "\n")
    if args.svg:
        _write(args.svg, correspondence_svg(res.warped_p, res.warped_q, res.final_correspondences))
    summary = {
        "score": _score(res.score),
        "direction": res.final_direction.value,
        "iterations": len(res.per_iteration),
        "per_iteration": [
            {**r.to_json_dict(), "bidirectional_cost": _score(r.bidirectional_cost)}
            for r in res.per_iteration
        ],
    }
    print(json.dumps(summary))


def cmd_warp(args):
    cfg = _config(args)
    res = match_shapes(_read(args.a, args), _read(args.b, args), cfg)
    _write(args.output, save_points(res.warped_p))


def _gallery_files(root):
    out = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in sorted(filenames):
            if name.lower().endswith((".csv", ".pgm", ".json")):
                out.append(os.path.join(dirpath, name))
    return out


def _label_for(path, root, shape):
    if shape.label:
        return shape.label
    rel = os.path.relpath(path, root)
    parent = os.path.dirname(rel)
    if parent:
        return parent.split(os.sep)[0]
    stem = os.path.splitext(os.path.basename(path))[0]
    return stem.split("_")[0]


def cmd_classify(args):
    cfg = _config(args)
    if args.gallery == "synthetic":
        gallery = make_gallery(seed=args.seed)
    else:
        if not os.path.isdir(args.gallery):
            raise UsageError(f"gallery directory not found: {args.gallery}")
        gallery = []
        for path in _gallery_files(args.gallery):
            s = _read(path, args)
            gallery.append(replace(s, label=_label_for(path, args.gallery, s)))
    query = _read(args.query, args)
    print(classify_knn(query, gallery, args.k, cfg))


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _algo_list(text):
    algos = [x.strip() for x in text.split(",") if x.strip()]
    bad = [a for a in algos if a not in ALGORITHMS]
    if bad or not algos:
        raise argparse.ArgumentTypeError(f"algorithms must be from {','.join(ALGORITHMS)}")
    return algos


def cmd_bench(args):
    try:
        report = bench_scaling(args.sizes, args.algos, args.reps, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write(args.output, report.to_csv())
    if args.json:
        _write(args.json, report.to_json() + "\n")
    if args.svg:
        _write(args.svg, bench_svg(report))
    if args.output not in (None, "-"):
        print(json.dumps(report.summary(), sort_keys=True))


# --- parser ------------------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="bscmatch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def pipeline_flags(p, iterations=True):
        p.add_argument("--config", help="key=value file with [pipeline]/[shape_context] sections")
        p.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD,
                       help="foreground threshold for .pgm inputs")
        if iterations:
            p.add_argument("--iterations", type=int)
            p.add_argument("--lambda", dest="lam", type=float,
                           help="TPS regularisation, as a multiple of the squared mean control-point distance")

    p = sub.add_parser("extract", help="trace contours of a PGM image into CSV")
    p.add_argument("image")
    p.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("correspond", help="one-pass correspondences and bidirectional score")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--prune", action="store_true")
    p.add_argument("--json")
    p.add_argument("--svg")
    pipeline_flags(p, iterations=False)
    p.set_defaults(func=cmd_correspond)

    p = sub.add_parser("match", help="full iterated matching pipeline")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--json")
    p.add_argument("--svg")
    pipeline_flags(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("warp", help="write A's points after the fitted warps")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("-o", "--output", required=True)
    pipeline_flags(p)
    p.set_defaults(func=cmd_warp)

    p = sub.add_parser("classify", help="k-nearest-neighbour label for a query shape")
    p.add_argument("--gallery", required=True,
                   help="directory of labelled shapes, or 'synthetic'")
    p.add_argument("--query", required=True)
    p.add_argument("-k", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    pipeline_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bench", help="scaling benchmark: BSC vs Hungarian")
    p.add_argument("--sizes", type=_int_list, default=[200, 400, 800, 1600])
    p.add_argument("--algos", type=_algo_list, default=list(ALGORITHMS))
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.add_argument("--json", help="write fitted slopes here")
    p.add_argument("--svg", help="write a log-log plot here")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "k", 1) < 1:
        parser.error("-k must be >= 1")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"bscmatch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BscError, OSError, ValueError, KeyError) as exc:
        print(f"bscmatch: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
