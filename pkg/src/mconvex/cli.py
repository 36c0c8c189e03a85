"""Experiment runner: every desk-scale claim as a named, reproducible command.

Each experiment writes <name>.json (always) plus optional CSV/SVG artifacts
into the output directory (--out, or $MCONVEX_OUTPUT_DIR, default ".").
Outputs are deterministic given (name, parameters, seed): dictionaries are
emitted with sorted keys, rationals as "p/q" strings, and reductions run in a
fixed order, so re-running a config is byte-identical.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .errors import MconvexError
from .metric import FiniteMetricSpace, PointMap, rat_from_str, rat_to_str


def _frac(text):
    """Parse a CLI number: "1/32", "0.5", or "3"."""
    if "/" in text:
        return rat_from_str(text)
    if "." in text or "e" in text or "E" in text:
        return float(text)
    return int(text)


def _int_range(text):
    """Parse "1..4" or "3" into a list of ints."""
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


# ---------------------------------------------------------------------------
# minimal SVG plotting
# ---------------------------------------------------------------------------

_SVG_W, _SVG_H, _SVG_PAD = 480, 320, 40


def _svg_frame(body, title):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}">\n'
            f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>\n'
            f'<text x="{_SVG_W // 2}" y="20" text-anchor="middle" font-size="14">{title}</text>\n'
            + body + "\n</svg>\n")


def _scale(vals, lo_px, hi_px, flip=False):
    lo, hi = min(vals), max(vals)
    span = float(hi - lo) or 1.0
    def to_px(v):
        t = (float(v) - float(lo)) / span
        if flip:
            t = 1 - t
        return round(lo_px + t * (hi_px - lo_px), 2)
    return to_px

def _svg_curve(xs, ys, title):
    px = _scale(xs, _SVG_PAD, _SVG_W - _SVG_PAD)
    py = _scale(ys, _SVG_PAD, _SVG_H - _SVG_PAD, flip=True)
    pts = " ".join(f"{px(x)},{py(y)}" for x, y in zip(xs, ys))
    dots = "\n".join(f'<circle cx="{px(x)}" cy="{py(y)}" r="3" fill="black"/>'
                     for x, y in zip(xs, ys))
    body = f'<polyline points="{pts}" fill="none" stroke="black"/>\n{dots}'
    return _svg_frame(body, title)


def _svg_bars(labels, ys, title):
    py = _scale([0] + list(ys), _SVG_PAD, _SVG_H - _SVG_PAD, flip=True)
    n = max(len(ys), 1)
    width = (_SVG_W - 2 * _SVG_PAD) / n
    bars = []
    for i, (lab, y) in enumerate(zip(labels, ys)):
        x0 = round(_SVG_PAD + i * width + 2, 2)
        top = py(y)
        bars.append(f'<rect x="{x0}" y="{top}" width="{round(width - 4, 2)}" '
                    f'height="{round(py(0) - top, 2)}" fill="gray"/>')
        bars.append(f'<text x="{round(x0 + width / 2 - 2, 2)}" y="{_SVG_H - 20}" '
                    f'text-anchor="middle" font-size="10">{lab}</text>')
    return _svg_frame("\n".join(bars), title)


# ---------------------------------------------------------------------------
# experiment implementations; each returns {filename_suffix: text}, where the
# ".json" entry is the machine-readable report
# ---------------------------------------------------------------------------

def _report(data):
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _run_laakso_ratio(args):
    from .laakso import build_laakso
    from .markov import convexity_ratio, laakso_walk
    rows = []
    for m in args.m:
        G = build_laakso(m)
        chain = laakso_walk(G)
        space = G.as_metric_space()
        rep = convexity_ratio(chain, lambda v: v, space, args.p)
        rows.append({"m": m, "ratio": rat_to_str(rep.ratio),
                     "lhs": rat_to_str(rep.lhs_total), "rhs": rat_to_str(rep.rhs),
                     "pi_lower": rep.pi_lower})
    csv = "m,ratio,lhs,rhs\n" + "".join(
        f'{r["m"]},{r["ratio"]},{r["lhs"]},{r["rhs"]}\n' for r in rows)
    svg = _svg_curve([r["m"] for r in rows],
                     [rat_from_str(r["ratio"]) for r in rows],
                     f"Laakso convexity ratio vs m (p={args.p})")
    return {".json": _report({"experiment": "laakso-ratio", "p": args.p, "rows": rows}),
            ".csv": csv, ".svg": svg}


def _run_bn_ratio(args):
    from .markov import bn_ratio
    rep = bn_ratio(args.n, args.p)
    return {".json": _report({"experiment": "bn-ratio", "n": args.n, **rep.to_dict()}),
            ".csv": rep.to_csv()}


def _run_per_k_bound(args):
    from .laakso import build_laakso
    from .markov import convexity_ratio, laakso_walk, per_k_laakso_bound
    G = build_laakso(args.m)
    rep = convexity_ratio(laakso_walk(G), lambda v: v, G.as_metric_space(), args.p)
    rows = []
    for k in range(2 * args.m - 1):
        count, bound = per_k_laakso_bound(G, k, args.p)
        rows.append({"k": k, "per_k": rat_to_str(rep.per_k[k]), "count": count,
                     "bound": rat_to_str(bound), "ok": rep.per_k[k] >= bound})
    svg = _svg_bars([r["k"] for r in rows],
                    [rat_from_str(r["per_k"]) for r in rows],
                    f"per-scale terms, m={args.m}, p={args.p}")
    return {".json": _report({"experiment": "per-k-bound", "m": args.m, "p": args.p,
                              "rows": rows, "all_ok": all(r["ok"] for r in rows)}),
            ".svg": svg}


def _run_pconvex_check(args):
    from .banach import pconvexity_slacks
    slacks = pconvexity_slacks(args.d, args.p, float(args.K), args.trials, seed=args.seed)
    return {".json": _report({
        "experiment": "pconvex-check", "d": args.d, "p": args.p,
        "K": rat_to_str(args.K) if not isinstance(args.K, float) else args.K,
        "trials": args.trials, "seed": args.seed,
        "min_slack": float(slacks.min()), "max_abs_slack_if_identity":
            float(abs(slacks).max()) if args.p == 2 and args.K == 1 else None,
        "violations": int((slacks < -1e-9).sum())})}


def _run_prop21_check(args):
    import random
    from .banach import LpSpace, check_prop21
    from .embeddings.generators import random_chain
    from .errors import DegenerateChain
    rng = random.Random(args.seed)
    space = LpSpace(3, 2)
    checked = failures = 0
    while checked < args.trials:
        chain, f = random_chain(rng)
        try:
            lhs, bound, holds = check_prop21(chain, f, space, 1)
        except DegenerateChain:
            continue
        checked += 1
        if not holds:
            failures += 1
    return {".json": _report({"experiment": "prop21-check", "trials": checked,
                              "seed": args.seed, "failures": failures})}


def _run_htree_validate(args):
    import random
    from .trees import HTreeSpace, scaled_distance_matrix
    from .embeddings.generators import random_valid_epsilon, htree_random_triple_violations
    rng = random.Random(args.seed)
    results = []
    for i in range(args.sequences):
        eps = random_valid_epsilon(rng, args.max_depth)
        mat, _ = scaled_distance_matrix(eps, args.exhaustive_depth)
        exhaustive_bad = _triangle_violations(mat)
        space = HTreeSpace(eps, args.max_depth)
        sampled_bad = htree_random_triple_violations(space, rng, args.samples)
        results.append({"sequence": i, "exhaustive_violations": exhaustive_bad,
                        "sampled_violations": len(sampled_bad)})
    return {".json": _report({"experiment": "htree-validate", "seed": args.seed,
                              "exhaustive_depth": args.exhaustive_depth,
                              "results": results,
                              "all_ok": all(r["exhaustive_violations"] == 0
                                            and r["sampled_violations"] == 0
                                            for r in results)})}


def _triangle_violations(mat):
    count = 0
    n = len(mat)
    for j in range(n):
        count += int(((mat[:, j, None] + mat[None, j, :]) < mat).sum())
    return count


def _run_classify(args):
    import random
    from .embeddings.classify import classify_3path, classify_fork, classify_midpoint
    from .embeddings.generators import gen_3path, gen_fork, gen_midpoint
    rng = random.Random(args.seed)
    counts = {}
    for _ in range(args.trials):
        if args.kind == "midpoint":
            sp, *pts = gen_midpoint(rng, args.delta)
            variant = classify_midpoint(sp, *pts, args.delta).variant
        elif args.kind == "fork":
            sp, *pts = gen_fork(rng, args.delta)
            variant = classify_fork(sp, *pts, args.delta).variant
        else:
            sp, *pts = gen_3path(rng, args.delta)
            variant = classify_3path(sp, *pts, args.delta).variant
        counts[variant] = counts.get(variant, 0) + 1
    return {".json": _report({"experiment": "classify", "kind": args.kind,
                              "delta": rat_to_str(Fraction(args.delta)),
                              "trials": args.trials, "seed": args.seed,
                              "variants": dict(sorted(counts.items())),
                              "unclassified": counts.get("Unclassified", 0)})}


def _run_boost(args):
    import random
    from .embeddings.generators import gen_boost_path
    from .embeddings.paths import path_boost
    rng = random.Random(args.seed)
    f = gen_boost_path(rng, args.n)
    res = path_boost(f, args.t, args.delta)
    return {".json": _report({"experiment": "boost", "n": args.n, "t": args.t,
                              "delta": rat_to_str(Fraction(args.delta)), "seed": args.seed,
                              "grid": res.grid, "T": rat_to_str(Fraction(res.t_value)),
                              "dist": rat_to_str(Fraction(res.dist))})}


def _run_b4_search(args):
    import random
    from .embeddings.classify import b4_bound_check
    from .embeddings.generators import make_space
    from .embeddings.search import generate_faithful_b4
    rng = random.Random(args.seed)
    space = make_space(Fraction(1, args.s_const), depth=60)
    delta = Fraction(args.delta)
    violations = []
    for i in range(args.trials):
        f = generate_faithful_b4(space, rng)
        dist, bound, holds = b4_bound_check(space, lambda v: f[v], delta)
        if not holds:
            violations.append({"trial": i, "dist": rat_to_str(dist),
                               "bound": rat_to_str(bound),
                               "map": {str(k): str(v) for k, v in f.items()}})
    return {".json": _report({"experiment": "b4-search", "s_const": args.s_const,
                              "delta": rat_to_str(delta), "trials": args.trials,
                              "seed": args.seed, "violations": violations})}


def _run_distortion_gap(args):
    from .embeddings.generators import make_space
    from .embeddings.search import distortion_gap_experiment
    space = make_space(Fraction(1, args.s_const), depth=max(60, 4 * args.n))
    out = distortion_gap_experiment(space, lambda n: args.s_const, args.n,
                                    seed=args.seed, trials=args.trials)
    return {".json": _report({"experiment": "distortion-gap", "n": args.n,
                              "s_const": args.s_const, "seed": args.seed,
                              **{k: (rat_to_str(v) if isinstance(v, Fraction) else v)
                                 for k, v in out.items()}})}


def _load_map(path):
    with open(path) as fh:
        data = json.load(fh)
    src = FiniteMetricSpace.from_json(json.dumps(data["source"]))
    tgt = FiniteMetricSpace.from_json(json.dumps(data["target"]))
    assignment = {p: data["assignment"][str(p)] for p in src.points}
    return PointMap(src, tgt, assignment)


def _load_chain(path):
    from .markov import ChainSpec
    with open(path) as fh:
        data = json.load(fh)
    kernels = {int(t): {z: {x: rat_from_str(p) for x, p in row.items()}
                        for z, row in kernel.items()}
               for t, kernel in data["kernels"].items()}
    initial = {z: rat_from_str(p) for z, p in data["initial"].items()}
    return ChainSpec(data["states"], data["t_min"], data["t_max"], kernels, initial)


def _run_quotient_verify(args):
    from .quotients import verify_quotient
    f = _load_map(args.map)
    violations = verify_quotient(f, args.a, args.b)
    return {".json": _report({
        "experiment": "quotient-verify", "a": rat_to_str(Fraction(args.a)),
        "b": rat_to_str(Fraction(args.b)),
        "violations": [{"kind": k, "center": str(x), "radius": rat_to_str(r),
                        "witness": str(y)} for k, x, r, y in violations],
        "is_quotient": not violations})}


def _run_quotient_lift(args):
    from .quotients import QuotientMap, lift_chain, trajectory_chain
    f = _load_map(args.map)
    chain = _load_chain(args.chain)
    q = QuotientMap(f, args.a, args.b)
    lift = lift_chain(q, chain, lambda s: s)
    tchain = trajectory_chain(chain)
    lifts = {"/".join(map(str, traj)): str(lift(traj)) for traj in tchain.states}
    return {".json": _report({"experiment": "quotient-lift",
                              "a": rat_to_str(Fraction(args.a)),
                              "b": rat_to_str(Fraction(args.b)),
                              "lifts": dict(sorted(lifts.items()))})}


def _run_ramsey_toy(args):
    import random
    from .embeddings.ramsey import ExhaustionReport, ramsey_search
    rng = random.Random(args.seed)
    table = {}
    def coloring(anc, desc):
        key = (anc, desc)
        if key not in table:
            table[key] = rng.randrange(args.r)
        return table[key]
    res = ramsey_search(args.k, args.m, args.r, coloring)
    if isinstance(res, ExhaustionReport):
        body = {"found": False, "nodes_explored": res.nodes_explored}
    else:
        body = {"found": True,
                "copy": {str(k): "/".join(map(str, v)) for k, v in sorted(res.items())}}
    return {".json": _report({"experiment": "ramsey-toy", "k": args.k, "m": args.m,
                              "r": args.r, "seed": args.seed, **body})}


def _run_extract_subtree(args):
    from .embeddings.extract import extract_vertically_faithful
    from .trees import tree_distance

    class _TreeMetric:
        dist = staticmethod(tree_distance)

    res = extract_vertically_faithful(lambda v: v, args.n, _TreeMetric(),
                                      args.t, args.delta, args.xi)
    return {".json": _report({
        "experiment": "extract-subtree", "n": args.n, "t": args.t,
        "delta": rat_to_str(Fraction(args.delta)), "xi": rat_to_str(Fraction(args.xi)),
        "params": res.params, "D": rat_to_str(Fraction(res.report.D)),
        "phi": {str(k): str(v) for k, v in sorted(res.phi.items())}})}


# ---------------------------------------------------------------------------
# registry / argument wiring
# ---------------------------------------------------------------------------

def _add_seed(sp):
    sp.add_argument("--seed", type=int, required=True,
                    help="PRNG seed (mandatory: outputs must be reproducible)")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mconvex", description="Markov-convexity experiment runner")
    parser.add_argument("--out", default=None,
                        help="output directory (default $MCONVEX_OUTPUT_DIR or .)")
    sub = parser.add_subparsers(dest="command", required=True)

    specs = {}

    def cmd(name, runner, help_text, randomized=False):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(runner=runner, name=name)
        if randomized:
            _add_seed(sp)
        specs[name] = (sp, help_text)
        return sp

    sp = cmd("laakso-ratio", _run_laakso_ratio, "convexity ratio of Laakso walks")
    sp.add_argument("--m", type=_int_range, default=[1, 2, 3, 4], help='e.g. "1..4"')
    sp.add_argument("--p", type=int, default=2)

    sp = cmd("bn-ratio", _run_bn_ratio, "convexity ratio of the B_n downward walk")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, default=2)

    sp = cmd("per-k-bound", _run_per_k_bound, "per-scale counting bound for Laakso walks")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--p", type=int, default=2)

    sp = cmd("pconvex-check", _run_pconvex_check,
             "sampled p-convexity inequality slacks", randomized=True)
    sp.add_argument("--d", type=int, default=8)
    sp.add_argument("--p", type=_frac, default=2)
    sp.add_argument("--K", type=_frac, default=1)
    sp.add_argument("--trials", type=int, default=100000)

    sp = cmd("prop21-check", _run_prop21_check,
             "chain transfer inequality on random chains", randomized=True)
    sp.add_argument("--trials", type=int, default=100)

    sp = cmd("htree-validate", _run_htree_validate,
             "triangle inequality for contracted tree metrics", randomized=True)
    sp.add_argument("--sequences", type=int, default=20)
    sp.add_argument("--exhaustive-depth", type=int, default=8)
    sp.add_argument("--samples", type=int, default=5000)
    sp.add_argument("--max-depth", type=int, default=64)

    sp = cmd("classify", _run_classify, "configuration classifier soundness",
             randomized=True)
    sp.add_argument("--kind", choices=["midpoint", "fork", "3path"], required=True)
    sp.add_argument("--delta", type=_frac, required=True)
    sp.add_argument("--trials", type=int, default=10000)

    sp = cmd("boost", _run_boost, "path boosting on a generated map", randomized=True)
    sp.add_argument("--n", type=int, default=4 ** 6)
    sp.add_argument("--t", type=int, default=4)
    sp.add_argument("--delta", type=_frac, default=Fraction(1, 2))

    sp = cmd("b4-search", _run_b4_search,
             "rigidity bound on random faithful B_4 embeddings", randomized=True)
    sp.add_argument("--s-const", type=int, default=5)
    sp.add_argument("--delta", type=_frac, default=Fraction(1, 512))
    sp.add_argument("--trials", type=int, default=10000)

    sp = cmd("distortion-gap", _run_distortion_gap,
             "upper bound vs searched lower evidence", randomized=True)
    sp.add_argument("--s-const", type=int, default=5)
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--trials", type=int, default=500)

    sp = cmd("quotient-verify", _run_quotient_verify, "Lipschitz quotient inclusions")
    sp.add_argument("--map", required=True)
    sp.add_argument("--a", type=_frac, required=True)
    sp.add_argument("--b", type=_frac, required=True)

    sp = cmd("quotient-lift", _run_quotient_lift, "greedy chain lifting")
    sp.add_argument("--map", required=True)
    sp.add_argument("--chain", required=True)
    sp.add_argument("--a", type=_frac, required=True)
    sp.add_argument("--b", type=_frac, required=True)

    sp = cmd("ramsey-toy", _run_ramsey_toy,
             "monochromatic binary subtree search", randomized=True)
    sp.add_argument("--k", type=int, default=4)
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--r", type=int, default=2)

    sp = cmd("extract-subtree", _run_extract_subtree,
             "vertically faithful subtree extraction pipeline")
    sp.add_argument("--n", type=int, default=6)
    sp.add_argument("--t", type=int, default=2)
    sp.add_argument("--delta", type=_frac, default=Fraction(1, 4))
    sp.add_argument("--xi", type=_frac, default=1)

    lp = sub.add_parser("list", help="experiment catalog")
    lp.set_defaults(runner=None, name="list")
    lp.set_defaults(catalog={name: help_text for name, (s, help_text) in specs.items()})

    rp = sub.add_parser("run", help="run an experiment by name")
    rp.add_argument("experiment")
    rp.add_argument("rest", nargs=argparse.REMAINDER)
    rp.set_defaults(runner="run", name="run")
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.name == "run":
        prefix = ["--out", args.out] if args.out else []
        return main(prefix + [args.experiment] + args.rest)
    if args.name == "list":
        print(_report({"experiments": args.catalog}), end="")
        return 0
    out_dir = args.out or os.environ.get("MCONVEX_OUTPUT_DIR", ".")
    try:
        artifacts = args.runner(args)
    except MconvexError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 1
    os.makedirs(out_dir, exist_ok=True)
    for suffix, text in artifacts.items():
        path = os.path.join(out_dir, args.name + suffix)
        with open(path, "w") as fh:
            fh.write(text)
    print(artifacts[".json"], end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
