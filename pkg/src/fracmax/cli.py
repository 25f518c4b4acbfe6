"""Command-line interface.

Exit codes:
    0  success
    2  bad parameters (usage errors, parameter windows, unknown names)
    3  unreadable or malformed input files
    4  convex solver failure
    5  violated invariant (empty ball, level range, failed verification)

All output is deterministic: JSON is written with sorted keys and no
timestamps, and random suites derive their draws from explicit seeds.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .corpus import (
    BUILTIN_CORPORA,
    builtin_corpus,
    generate_space,
    load_corpus,
    read_function_csv,
    write_corpus,
)
from .covering import build_cover, build_partition_of_unity
from .errors import (
    AnnulusRangeError,
    EmptyBallError,
    FracmaxError,
    InputError,
    ParameterWindowError,
    SolverError,
    SpaceFormatError,
)
from .maximal import (
    build_scale_family,
    discrete_fractional_maximal,
    fractional_maximal,
    standard_radius_set,
)
from .norms import besov_norm, optimal_gradient, triebel_lizorkin_norm
from .space import (
    estimate_geometry,
    load_space,
    radius_scale_set,
    save_space,
    space_to_dict,
)
from .verify import (
    EXPERIMENTS,
    run_boundedness_suite,
    run_fefferman_stein_suite,
    run_poincare_suite,
    run_scalar_transfer_suite,
    run_sequence_transfer_suite,
    write_boundedness_tables,
    write_reports,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SOLVER = 4
EXIT_INVARIANT = 5


def _print_json(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_u(path: str, space) -> np.ndarray:
    return read_function_csv(path, space)


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------
def _cmd_space_build(args: argparse.Namespace) -> int:
    spec = {"kind": args.kind}
    for key in ("n", "dims", "level", "dim"):
        val = getattr(args, key)
        if val is not None:
            spec[key] = val
    if args.spacing is not None:
        spec["spacing"] = args.spacing
    if args.generator_seed is not None:
        spec["seed"] = args.generator_seed
    label, space = generate_space(spec)
    save_space(space, args.out)
    _print_json({"label": label, "n": space.n, "out": args.out}, None)
    return EXIT_OK


def _cmd_space_inspect(args: argparse.Namespace) -> int:
    space = load_space(args.space)
    doc: dict = {
        "n": space.n,
        "diam": space.diam,
        "min_gap": space.min_gap,
        "total_measure": space.total_measure,
    }
    if args.constants:
        geom = estimate_geometry(space)
        doc["constants"] = geom.to_dict()
    if args.dump_balls is not None:
        r = args.dump_balls
        doc["balls"] = {
            space.ids[i]: {
                "open": sorted(space.ball(space.ids[i], r, closed=False)),
                "closed": sorted(space.ball(space.ids[i], r, closed=True)),
            }
            for i in range(space.n)
        }
        doc["ball_radius"] = r
    _print_json(doc, args.out)
    return EXIT_OK


def _cmd_cover_build(args: argparse.Namespace) -> int:
    space = load_space(args.space)
    cover = build_cover(space, args.r)
    pou = build_partition_of_unity(space, cover)
    doc = {
        "r": args.r,
        "centers": [space.ids[i] for i in cover.center_indices],
        "size": cover.size,
        "overlap": pou.overlap,
        "nu": pou.nu,
        "lip_times_r": pou.lip_times_r,
        "max_sum_deviation": pou.max_sum_deviation,
    }
    if args.dump_phi:
        with open(args.dump_phi, "w", encoding="utf-8", newline="") as fh:
            fh.write("center_id,point_id,phi\n")
            for ci, center in enumerate(cover.center_indices):
                for x in range(space.n):
                    val = float(pou.phi[ci, x])
                    if val > 0.0:
                        fh.write(f"{space.ids[center]},{space.ids[x]},{val!r}\n")
        doc["phi_csv"] = args.dump_phi
    _print_json(doc, args.out)
    return EXIT_OK


def _cmd_maxfn(args: argparse.Namespace) -> int:
    space = load_space(args.space)
    u = _load_u(args.u, space)
    if args.op == "standard":
        radii = standard_radius_set(space, policy=args.scales)
        values, arg_r = fractional_maximal(space, u, args.alpha, radii)
    else:
        scales = radius_scale_set(space, policy=args.scales)
        if scales.size == 0:
            raise ParameterWindowError("space admits no positive scales")
        family = build_scale_family(space, scales)
        values, arg_r = discrete_fractional_maximal(space, u, args.alpha, family)
    lines = ["point_id,value,arg_radius"]
    for i in range(space.n):
        lines.append(f"{space.ids[i]},{float(values[i])!r},{float(arg_r[i])!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_norm(args: argparse.Namespace) -> int:
    space = load_space(args.space)
    u = _load_u(args.u, space)
    doc: dict = {"kind": args.kind, "s": args.s, "p": args.p}
    if args.kind == "hajlasz":
        g, res = optimal_gradient(space, u, args.s, args.p)
        doc.update(
            {
                "value": res.value,
                "status": res.status,
                "bound_kind": res.bound_kind,
                "flags": list(res.flags),
                "minimizer": {space.ids[i]: float(g[i]) for i in range(space.n)},
            }
        )
    else:
        if args.q is None:
            raise ParameterWindowError(f"--q is required for kind={args.kind}")
        doc["q"] = args.q
        solve = besov_norm if args.kind == "besov" else triebel_lizorkin_norm
        res = solve(space, u, args.s, args.p, args.q)
        doc.update(
            {
                "value": res.value,
                "status": res.status,
                "bound_kind": res.bound_kind,
                "flags": list(res.flags),
                "minimizer": {
                    "k_min": res.sequence.k_min,
                    "k_max": res.sequence.k_max,
                    "levels": {
                        str(k): {
                            space.ids[i]: float(res.sequence.level(k)[i])
                            for i in range(space.n)
                        }
                        for k in res.sequence.k_values
                    },
                },
            }
        )
        if res.level_values is not None:
            doc["level_values"] = {
                str(k): float(v)
                for k, v in zip(res.sequence.k_values, res.level_values)
            }
    _print_json(doc, args.out)
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    os.makedirs(args.out, exist_ok=True)
    failures = 0
    if args.suite == "bounds":
        tables = run_boundedness_suite(corpus)
        write_boundedness_tables(tables, args.out)
        for table in tables:
            line = f"{table['experiment']}: max_ratio={table['max_ratio']!r}"
            sys.stdout.write(line + "\n")
    else:
        smooth = {
            key: getattr(args, key)
            for key in ("s", "alpha", "p", "q")
            if getattr(args, key) is not None
        }
        overrides = {
            key: getattr(args, key)
            for key in ("delta", "eps", "eps_prime", "t")
            if getattr(args, key) is not None
        }
        if args.suite == "poincare":
            reports = run_poincare_suite(
                corpus, s=smooth.get("s", 0.5), p_exp=smooth.get("p", 1.0)
            )
        elif args.suite == "thm33":
            if "s" in smooth or "alpha" in smooth:
                pairs = ((smooth.get("s", 0.5), smooth.get("alpha", 0.3)),)
            else:
                pairs = ((0.5, 0.3), (1.0, 0.0), (0.8, 0.5))
            reports = run_scalar_transfer_suite(
                corpus, pairs=pairs, p_for_gradient=smooth.get("p", 1.0)
            )
        elif args.suite == "thm43":
            reports = run_sequence_transfer_suite(
                corpus,
                s=smooth.get("s", 0.5),
                alpha=smooth.get("alpha", 0.3),
                p=smooth.get("p", 1.5),
                q=smooth.get("q", 1.5),
                overrides=overrides,
            )
        else:
            reports = run_fefferman_stein_suite(corpus, seed=args.seed)
        write_reports(reports, args.out)
        for rep in reports:
            status = "pass" if rep.passed else "FAIL"
            inst = rep.params.get("instance", "")
            sys.stdout.write(
                f"{rep.check_id} {inst}: C={rep.best_constant!r} [{status}]\n"
            )
            failures += 0 if rep.passed else 1
    if failures:
        sys.stderr.write(f"{failures} check(s) failed\n")
        return EXIT_INVARIANT
    return EXIT_OK


def _cmd_corpus_make(args: argparse.Namespace) -> int:
    if args.spec in BUILTIN_CORPORA:
        corpus = builtin_corpus(args.spec)
    else:
        corpus = load_corpus(args.spec)
    manifest = write_corpus(corpus, args.out)
    _print_json({"manifest": manifest, "instances": len(corpus.instances)}, None)
    return EXIT_OK


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracmax",
        description="Maximal operators, smoothness norms, and inequality "
        "verification on finite metric measure spaces.",
    )
    parser.add_argument(
        "--seed", type=int, default=2024, help="seed for randomized suites"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_space = sub.add_parser("space", help="build or inspect spaces")
    space_sub = p_space.add_subparsers(dest="space_command", required=True)
    p_build = space_sub.add_parser("build", help="generate a space file")
    p_build.add_argument("--kind", required=True)
    p_build.add_argument("--n", type=int)
    p_build.add_argument("--dims", type=int)
    p_build.add_argument("--level", type=int)
    p_build.add_argument("--dim", type=int)
    p_build.add_argument("--spacing", type=float)
    p_build.add_argument("--generator-seed", type=int)
    p_build.add_argument("--out", required=True)
    p_build.set_defaults(func=_cmd_space_build)
    p_inspect = space_sub.add_parser("inspect", help="summarize a space file")
    p_inspect.add_argument("space")
    p_inspect.add_argument("--constants", action="store_true")
    p_inspect.add_argument("--dump-balls", type=float, default=None, metavar="R")
    p_inspect.add_argument("--out")
    p_inspect.set_defaults(func=_cmd_space_inspect)

    p_cover = sub.add_parser("cover", help="covers and partitions of unity")
    cover_sub = p_cover.add_subparsers(dest="cover_command", required=True)
    p_cbuild = cover_sub.add_parser("build", help="build a scale-r cover")
    p_cbuild.add_argument("--space", required=True)
    p_cbuild.add_argument("--r", type=float, required=True)
    p_cbuild.add_argument("--dump-phi")
    p_cbuild.add_argument("--out")
    p_cbuild.set_defaults(func=_cmd_cover_build)

    p_max = sub.add_parser("maxfn", help="fractional maximal functions")
    p_max.add_argument("--space", required=True)
    p_max.add_argument("--u", required=True)
    p_max.add_argument("--alpha", type=float, default=0.0)
    p_max.add_argument("--op", choices=("standard", "discrete"), default="standard")
    p_max.add_argument(
        "--scales", choices=("dyadic", "distances"), default="distances"
    )
    p_max.add_argument("--out")
    p_max.set_defaults(func=_cmd_maxfn)

    p_norm = sub.add_parser("norm", help="smoothness norms via convex programs")
    p_norm.add_argument("--space", required=True)
    p_norm.add_argument("--u", required=True)
    p_norm.add_argument("--kind", choices=("hajlasz", "besov", "tl"), required=True)
    p_norm.add_argument("--s", type=float, required=True)
    p_norm.add_argument("--p", type=float, required=True)
    p_norm.add_argument("--q", type=float)
    p_norm.add_argument("--out")
    p_norm.set_defaults(func=_cmd_norm)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument(
        "--suite",
        choices=("poincare", "thm33", "thm43", "bounds", "fs"),
        required=True,
    )
    p_verify.add_argument("--corpus", required=True)
    p_verify.add_argument("--out", required=True)
    p_verify.add_argument("--s", type=float)
    p_verify.add_argument("--alpha", type=float)
    p_verify.add_argument("--p", type=float)
    p_verify.add_argument("--q", type=float)
    p_verify.add_argument("--delta", type=float)
    p_verify.add_argument("--eps", type=float)
    p_verify.add_argument("--eps-prime", dest="eps_prime", type=float)
    p_verify.add_argument("--t", type=float)
    p_verify.set_defaults(func=_cmd_verify)

    p_corpus = sub.add_parser("corpus", help="materialize corpora")
    corpus_sub = p_corpus.add_subparsers(dest="corpus_command", required=True)
    p_cmake = corpus_sub.add_parser("make", help="write a corpus directory")
    p_cmake.add_argument("--spec", required=True)
    p_cmake.add_argument("--out", required=True)
    p_cmake.set_defaults(func=_cmd_corpus_make)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterWindowError, InputError) as exc:
        sys.stderr.write(f"parameter error: {exc}\n")
        return EXIT_USAGE
    except (SpaceFormatError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_IO
    except SolverError as exc:
        sys.stderr.write(f"solver error: {exc}\n")
        return EXIT_SOLVER
    except (EmptyBallError, AnnulusRangeError) as exc:
        sys.stderr.write(f"invariant violated: {exc}\n")
        return EXIT_INVARIANT
    except FracmaxError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
