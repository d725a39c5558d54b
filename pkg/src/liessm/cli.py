"""Command-line entry point; every experiment and generator as a subcommand.

Conventions: all randomized subcommands take --seed and are byte-reproducible
for a fixed configuration regardless of --jobs; file outputs carry a metadata
header (tool version, seed, config echo); exit codes are 0 success,
2 validation error, 3 numerical-guard trip, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, catalog, fileio
from .algebra import classify, lie_closure
from .cascade import decompose, scaling_experiment, unit_duration_path, verify_cascade
from .errors import GuardError, InvariantError, ValidationError
from .groups import (
    a5_rotation_elements,
    compose_word,
    gen_word_dataset,
    make_group,
    rotation_record,
    word_record,
)
from .lyndon import cfl_factorize, depth_bound, is_lyndon, lyndon_count, lyndon_words
from .ssm import estimate_sim_error, four_path_probe

DEFAULT_TOL = float(os.environ.get("LIESSM_TOL", "1e-9"))


def _load_generators(spec: str):
    if Path(spec).exists():
        n, matrices = fileio.load_algebra(spec)
        return list(matrices.values())
    return list(catalog.named_generators(spec))


def _load_ssm(spec: str):
    if Path(spec).exists():
        return fileio.load_ssm(spec)
    return catalog.named_ssm(spec)


def _parse_eps(spec: str, grid_points: int) -> list[float]:
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return list(np.geomspace(float(lo), float(hi), grid_points))
    return [float(x) for x in spec.split(",")]


def _parallel_lines(make_line, count: int, jobs: int) -> list[str]:
    if jobs <= 1:
        return [make_line(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(make_line, range(count)))


def _cmd_classify(args) -> int:
    gens = _load_generators(args.algebra)
    basis = lie_closure(gens, tol=args.tol)
    report = classify(basis)
    print(f"# {fileio.TOOL_TAG} classify algebra={args.algebra}")
    print(
        f"dim={report.dim} class={report.class_label} "
        f"derived_length={report.derived_length} nilpotency_class={report.nilpotency_class}"
    )
    print(f"derived_dims={report.derived_dims}")
    print(f"lower_central_dims={report.lower_central_dims}")
    if args.out:
        fileio.write_json_report(
            args.out,
            report.to_dict(),
            fileio.metadata("classify", algebra=args.algebra, tol=args.tol),
        )
    return 0


def _cmd_simerror(args) -> int:
    target = _load_ssm(args.target)
    approx = _load_ssm(args.approx)
    report = estimate_sim_error(
        target, approx, args.horizon, args.samples, args.seed, segments=args.segments
    )
    print(f"# {fileio.TOOL_TAG} simerror target={args.target} approx={args.approx}")
    print(f"delta_hat={report.delta_hat:.16e} horizon={report.horizon} samples={report.samples}")
    if args.out:
        fileio.write_json_report(
            args.out,
            report.to_dict(),
            fileio.metadata(
                "simerror",
                seed=args.seed,
                target=args.target,
                approx=args.approx,
                horizon=args.horizon,
                samples=args.samples,
                segments=args.segments,
            ),
        )
    return 0


def _cmd_scaling(args) -> int:
    gens = np.stack(_load_generators(args.algebra))
    orders = [int(c) for c in args.orders.split(",")]
    eps_values = _parse_eps(args.eps, args.grid_points)
    if len(eps_values) < 3:
        raise ValidationError("the epsilon grid needs at least 3 points for a slope fit")
    rows, slopes = scaling_experiment(gens, orders, eps_values, args.paths_per_point, args.seed)
    print(f"# {fileio.TOOL_TAG} scaling algebra={args.algebra}")
    for order in sorted(slopes):
        print(f"order={order} fitted_slope={slopes[order]:.4f} expected={order + 1}")
    if args.out:
        fileio.write_scaling_csv(
            args.out,
            rows,
            slopes,
            fileio.metadata(
                "scaling",
                seed=args.seed,
                algebra=args.algebra,
                orders=args.orders,
                eps=args.eps,
                grid_points=args.grid_points,
                paths_per_point=args.paths_per_point,
            ),
        )
    return 0


def _cmd_wordgen(args) -> int:
    group = make_group(args.group)

    def record(i: int) -> dict:
        rec = word_record(group, args.len, args.seed, i, bos=args.bos)
        return {"tokens": list(rec.tokens), "labels": list(rec.labels)}

    records = _parallel_lines(record, args.count, args.jobs)
    meta = fileio.metadata(
        "wordgen",
        seed=args.seed,
        group=args.group,
        order=group.order,
        length=args.len,
        count=args.count,
        bos=args.bos,
        bos_token=group.order,
    )
    fileio.write_jsonl(args.out, records, meta)
    if args.verify:
        mismatches = 0
        for rec in fileio.read_jsonl(args.out):
            tokens = rec["tokens"]
            labels = rec["labels"]
            if args.bos:
                if tokens[0] != group.order or labels[0] != group.order:
                    mismatches += 1
                tokens, labels = tokens[1:], labels[1:]
            for k in range(len(tokens)):
                if compose_word(group, tokens[: k + 1]) != labels[k]:
                    mismatches += 1
                    break
        if mismatches:
            raise InvariantError(f"{mismatches} records failed the label re-check")
        print(f"verify: {args.count} records OK")
    print(f"wrote {args.count} records to {args.out}")
    return 0


def _cmd_rotgen(args) -> int:
    mats, _ = a5_rotation_elements()

    def record(i: int) -> dict:
        rec = rotation_record(mats, args.len, args.seed, i)
        return {"tokens": list(rec.tokens), "v0": list(rec.v0),
                "targets": [list(t) for t in rec.targets]}

    records = _parallel_lines(record, args.count, args.jobs)
    meta = fileio.metadata(
        "rotgen", seed=args.seed, group="A5_rotations", order=60,
        length=args.len, count=args.count,
    )
    fileio.write_jsonl(args.out, records, meta)
    print(f"wrote {args.count} records to {args.out}")
    return 0


def _cmd_depth(args) -> int:
    print(depth_bound(args.T))
    return 0


def _cmd_witt(args) -> int:
    rows = []
    cumulative = 0
    for m in range(1, args.T + 1):
        count = lyndon_count(args.n, m)
        cumulative += count
        rows.append((args.n, m, count, cumulative))
    if args.out:
        fileio.write_count_csv(args.out, rows, fileio.metadata("witt", n=args.n, T=args.T))
    print(cumulative)
    return 0


def _cmd_lyndon(args) -> int:
    if args.word:
        word = tuple(int(x) for x in args.word.split(","))
        factors = cfl_factorize(word)
        print(f"lyndon={is_lyndon(word)}")
        print("factors=" + ";".join(",".join(str(x) for x in f) for f in factors))
        return 0
    counts: dict[int, int] = {m: 0 for m in range(1, args.max_len + 1)}
    for w in lyndon_words(args.n, args.max_len):
        counts[len(w)] += 1
        if args.list:
            print(",".join(str(x) for x in w))
    rows = []
    cumulative = 0
    for m in range(1, args.max_len + 1):
        cumulative += counts[m]
        rows.append((args.n, m, counts[m], cumulative))
    if args.out:
        fileio.write_count_csv(
            args.out, rows, fileio.metadata("lyndon", n=args.n, max_len=args.max_len)
        )
    if not args.list:
        for n, m, count, cum in rows:
            print(f"{n},{m},{count},{cum}")
    return 0


def _cmd_cascade(args) -> int:
    ssm = _load_ssm(args.ssm)
    decomp = decompose(ssm, tol=args.tol)
    rng_paths = [
        unit_duration_path(
            np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(i,))),
            ssm.alphabet_size,
        )
        for i in range(args.paths)
    ]
    error = verify_cascade(decomp, rng_paths, step=1.0 / args.step_div)
    print(f"# {fileio.TOOL_TAG} cascade ssm={args.ssm}")
    print(f"depth={decomp.depth} derived_length={decomp.derived_length}")
    print(f"reconstruction_error={error:.16e} paths={args.paths} step=1/{args.step_div}")
    if args.out:
        payload = {
            "depth": decomp.depth,
            "derived_length": decomp.derived_length,
            "reconstruction_error": error,
            "layers": [
                {
                    "kind": layer.kind,
                    "column": layer.column,
                    "ideal_basis": [b.tolist() for b in layer.ideal_basis],
                    "gens": layer.gens.tolist(),
                    "quotient_gens": None
                    if layer.quotient_gens is None
                    else layer.quotient_gens.tolist(),
                }
                for layer in decomp.layers
            ],
        }
        fileio.write_json_report(
            args.out,
            payload,
            fileio.metadata(
                "cascade", seed=args.seed, ssm=args.ssm, paths=args.paths,
                step_div=args.step_div, tol=args.tol,
            ),
        )
    return 0


def _cmd_fourpath(args) -> int:
    ssm = _load_ssm(args.ssm)
    prefix1 = fileio.load_path(args.prefix1, ssm)
    prefix2 = fileio.load_path(args.prefix2, ssm)
    suffix = fileio.load_path(args.suffix, ssm)
    report = four_path_probe(ssm, prefix1, prefix2, suffix)
    print(f"# {fileio.TOOL_TAG} fourpath ssm={args.ssm}")
    print(f"residual={report.residual:.16e}")
    print(f"diff_of_differences_norm={report.diff_norm:.16e}")
    print(f"suffix_flow_gap_norm={report.suffix_gap_norm:.16e}")
    if args.out:
        fileio.write_json_report(
            args.out,
            {
                "residual": report.residual,
                "diff_of_differences": report.diff_of_differences.tolist(),
                "suffix_flow_gap": report.suffix_flow_gap.tolist(),
                "prefix_state_gap": report.prefix_state_gap.tolist(),
            },
            fileio.metadata(
                "fourpath", ssm=args.ssm, prefix1=args.prefix1,
                prefix2=args.prefix2, suffix=args.suffix,
            ),
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liessm",
        description="Order-sensitivity analysis and benchmark generation for "
        "state-space sequence models.",
    )
    parser.add_argument("--version", action="version", version=fileio.TOOL_TAG)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify the Lie closure of a generator file")
    p.add_argument("--algebra", required=True, help="algebra JSON file or builtin name")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("simerror", help="sampled simulation-error estimate")
    p.add_argument("--target", required=True)
    p.add_argument("--approx", required=True)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--segments", type=int, default=8)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simerror)

    p = sub.add_parser("scaling", help="truncation-order error scaling sweep")
    p.add_argument("--algebra", default="so3")
    p.add_argument("--orders", default="1,2,3")
    p.add_argument("--eps", default="1e-3..1e-1", help="A..B log grid or comma list")
    p.add_argument("--grid-points", type=int, default=8)
    p.add_argument("--paths-per-point", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_scaling)

    p = sub.add_parser("wordgen", help="generate word-problem records (JSONL)")
    p.add_argument("--group", required=True)
    p.add_argument("--len", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--bos", action=argparse.BooleanOptionalAction, default=False)
    p.add_argument("--verify", action="store_true", help="re-check labels before exiting")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_wordgen)

    p = sub.add_parser("rotgen", help="generate rotation-tracking records (JSONL)")
    p.add_argument("--len", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_rotgen)

    p = sub.add_parser("depth", help="layer bound for bounded word length")
    p.add_argument("--T", type=int, required=True)
    p.set_defaults(func=_cmd_depth)

    p = sub.add_parser("witt", help="free-Lie dimension table")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_witt)

    p = sub.add_parser("lyndon", help="enumerate or factorize Lyndon words")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--max-len", type=int, default=5)
    p.add_argument("--word", help="comma-separated letters to factorize instead")
    p.add_argument("--list", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_lyndon)

    p = sub.add_parser("cascade", help="decompose a triangular SSM into abelian layers")
    p.add_argument("--ssm", required=True)
    p.add_argument("--paths", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step-div", type=int, default=256)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_cascade)

    p = sub.add_parser("fourpath", help="two-prefix reversed-suffix probe")
    p.add_argument("--ssm", required=True)
    p.add_argument("--prefix1", required=True)
    p.add_argument("--prefix2", required=True)
    p.add_argument("--suffix", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fourpath)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return 3
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
