"""Command-line surface: fit, edit, combine, score, stats, synth.

stdout carries machine-readable output (JSON unless ``--pretty``); stderr
carries diagnostics and, on failure, a one-line error JSON. Exit codes:
0 success, 2 usage or input error, 3 numerical failure. The environment
variable ``SENSE_SPACE_SEED`` overrides the default seed of commands that
take one.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import embedding_io, fixtures, sense_edit, sense_space, stats, synth
from .errors import IndexOutOfBounds, SenseSpaceError


def _default_seed() -> int:
    env = os.environ.get("SENSE_SPACE_SEED")
    return int(env) if env else stats.DEFAULT_SEED


def _emit(payload, pretty_lines=None, pretty: bool = False) -> None:
    if pretty and pretty_lines is not None:
        print("\n".join(pretty_lines))
    else:
        json.dump(payload, sys.stdout)
        sys.stdout.write("\n")


def _select_prompt(bundle, index, text) -> int:
    if (index is None) == (text is None):
        raise SenseSpaceError("select a prompt with exactly one of index or text")
    if text is not None:
        return bundle.index_of(text)
    if not (0 <= index < len(bundle.prompts)):
        raise IndexOutOfBounds(
            f"prompt index {index} out of range [0, {len(bundle.prompts)})"
        )
    return index


def _target_token_indices(encoding, token_indices, target_word) -> list[int]:
    if token_indices:
        return list(token_indices)
    if target_word:
        # prefer whole-word token matches; only without any do we fall back
        # to sub-token matches (which are substring-based and can overreach,
        # so explicit --token-index stays the authoritative selector)
        exact = [
            i
            for i, tok in enumerate(encoding.tokens)
            if embedding_io.normalize_token(tok) == target_word.casefold()
        ]
        if exact:
            return exact
        partial = [
            i
            for i, tok in enumerate(encoding.tokens)
            if embedding_io.token_matches_word(tok, target_word)
        ]
        if partial:
            return partial
        raise IndexOutOfBounds(
            f"no token of prompt {encoding.text!r} matches {target_word!r}"
        )
    raise SenseSpaceError("give --token-index or --target-word to pick tokens")


def _cmd_fit(args) -> None:
    bundle = embedding_io.load_bundle(args.bundle)
    triples = embedding_io.load_triples(args.triples)
    d1, d2, report = sense_space.fit_senses(bundle, triples, args.threshold)
    sense_space.save_directions(args.out, d1, d2)
    payload = report.to_dict()
    lines = [
        f"wrote directions to {args.out}",
        f"sense 1: k={report.sense1.k} scale={report.sense1.scale:.4f}",
        f"sense 2: k={report.sense2.k} scale={report.sense2.scale:.4f}",
    ]
    for row in payload["rows"]:
        lines.append(
            f"  {row['amb']!r}: amb=({row['amb_dot_1']:+.3f},{row['amb_dot_2']:+.3f}) "
            f"s1=({row['s1_dot_1']:+.3f},{row['s1_dot_2']:+.3f}) "
            f"s2=({row['s2_dot_1']:+.3f},{row['s2_dot_2']:+.3f})"
        )
    _emit(payload, lines, args.pretty)


def _cmd_edit(args) -> None:
    bundle = embedding_io.load_bundle(args.bundle)
    d1, d2 = sense_space.load_directions(args.directions)
    keep, remove = (d2, d1) if args.target_sense == 2 else (d1, d2)
    pi = _select_prompt(bundle, args.prompt_index, args.prompt_text)
    encoding = bundle.prompts[pi]
    indices = _target_token_indices(encoding, args.token_index, args.target_word)
    edited = sense_edit.edit_prompt(encoding, indices, keep, remove)
    prompts = list(bundle.prompts)
    prompts[pi] = edited
    out_bundle = embedding_io.EmbeddingBundle(tuple(prompts), bundle.dim, bundle.encoder_tag)
    embedding_io.save_bundle(args.out, out_bundle)
    payload = {
        "out": str(args.out),
        "prompt_index": pi,
        "token_indices": indices,
        "target_sense": args.target_sense,
    }
    _emit(payload, [f"edited prompt {pi} tokens {indices} -> {args.out}"], args.pretty)


def _cmd_combine(args) -> None:
    bundle = embedding_io.load_bundle(args.bundle)
    p1 = bundle.prompts[_select_prompt(bundle, args.prompt1_index, args.prompt1_text)]
    p2 = bundle.prompts[_select_prompt(bundle, args.prompt2_index, args.prompt2_text)]
    combined = sense_edit.combine_encodings(p1, p2, args.alpha1, args.alpha2)
    out_bundle = embedding_io.EmbeddingBundle((combined,), bundle.dim, bundle.encoder_tag)
    embedding_io.save_bundle(args.out, out_bundle)
    payload = {"out": str(args.out), "text": combined.text}
    _emit(payload, [f"wrote {combined.text!r} -> {args.out}"], args.pretty)


def _cmd_score(args) -> None:
    bundle = embedding_io.load_bundle(args.bundle)
    if not bundle.prompts:
        raise SenseSpaceError("bundle holds no prompts to score")
    d1, d2 = sense_space.load_directions(args.directions)
    if args.prompt_index is not None:
        selected = [args.prompt_index]
        if not (0 <= args.prompt_index < len(bundle.prompts)):
            raise IndexOutOfBounds(f"prompt index {args.prompt_index} out of range")
    else:
        selected = range(len(bundle.prompts))
    rows = []
    for pi in selected:
        p = bundle.prompts[pi]
        token_indices = args.token_index if args.token_index else range(len(p.tokens))
        for ti in token_indices:
            vec = embedding_io.extract_token_vector(bundle, pi, ti)
            rows.append(
                {
                    "prompt_index": pi,
                    "text": p.text,
                    "token_index": ti,
                    "token": p.tokens[ti],
                    "dot_1": float(vec @ d1.unit),
                    "dot_2": float(vec @ d2.unit),
                }
            )
    lines = [
        f"[{r['prompt_index']}:{r['token_index']}] {r['token']:>12s} "
        f"dot1={r['dot_1']:+.4f} dot2={r['dot_2']:+.4f}"
        for r in rows
    ]
    _emit(rows, lines, args.pretty)


def _counts_paths(args, mode: str):
    if args.counts:
        return args.counts
    # bundled tables are the default input; proportions reports over the
    # pair tables, whose pooled sum row is the headline summary
    if mode in ("pairs", "proportions"):
        return fixtures.pair_table_paths()
    if mode == "editing":
        return fixtures.editing_table_paths()
    raise SenseSpaceError(f"--counts is required for mode {mode!r}")


def _cmd_stats(args) -> None:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.mode == "direct":
        if not (args.group_a and args.group_b):
            raise SenseSpaceError("direct mode needs --group-a and --group-b")
        group_a = [int(x) for x in args.group_a.split(",")]
        group_b = [int(x) for x in args.group_b.split(",")]
        res = stats.permutation_test(group_a, group_b, seed, args.exact_cap, args.draws)
        payload = vars(res).copy()
        _emit(
            payload,
            [f"stat={res.observed_statistic} p={res.p_value:.6g} ({res.mode})"],
            args.pretty,
        )
        return
    if args.mode == "proportions":
        tables = []
        for path in _counts_paths(args, "proportions"):
            tables.extend(stats.read_counts_csv(path))
        payload = stats.proportions_report(tables)
        lines = [
            f"{row['condition']:>16s}: "
            + " ".join(f"{k}={v:5.1f}%" for k, v in row["percent"].items())
            for row in payload["conditions"]
        ]
        lines.append("aggregate:")
        for cond, entry in payload["aggregate"].items():
            lines.append(
                f"{cond:>16s}: "
                + " ".join(f"{k}={v:5.1f}%" for k, v in entry["percent"].items())
            )
        _emit(payload, lines, args.pretty)
        return
    paths = _counts_paths(args, args.mode)
    if args.mode == "pairs":
        results = stats.pair_significance_suite(paths, seed, args.exact_cap, args.draws)
        lines = [
            f"{r['table']:>16s} sum vs {r['baseline']}: both {r['sum_both']:2d} vs "
            f"{r['baseline_both']:2d}  p={r['p_value']:.6f} "
            f"{'significant' if r['significant'] else 'n.s.'}"
            for r in results
        ]
    else:
        results = stats.significance_suite(
            paths, args.count_both, seed, args.exact_cap, args.draws
        )
        lines = [
            f"{r['table']:>24s} ->{r['direction']}: {r['edited_successes']:2d} vs "
            f"{r['unedited_successes']:2d}  p={r['p_value']:.6f} "
            f"{'significant' if r['significant'] else 'n.s.'}"
            for r in results
        ]
    _emit(results, lines, args.pretty)


def _cmd_synth(args) -> None:
    seed = args.seed if args.seed is not None else _default_seed()
    a, b = (float(x) for x in args.amb_coeffs.split(","))
    spec = synth.SynthSpec(
        dim=args.dim,
        n_sentences=args.sentences,
        amb_coeffs=(a, b),
        sense_coeff=args.sense_coeff,
        context_scale=args.context_scale,
        noise_sigma=args.noise_sigma,
        seed=seed,
    )
    bundle, triples, truth = synth.generate_synthetic(spec)
    embedding_io.save_bundle(args.out_bundle, bundle)
    embedding_io.save_triples(args.out_triples, triples)
    truth.save(args.out_truth)
    payload = {
        "bundle": str(args.out_bundle),
        "triples": str(args.out_triples),
        "truth": str(args.out_truth),
        "prompts": len(bundle.prompts),
        "spec": spec.to_dict(),
    }
    _emit(payload, [f"wrote {len(bundle.prompts)} prompts -> {args.out_bundle}"], args.pretty)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensespace",
        description="fit sense directions, edit and combine prompt encodings, "
        "and test image-count tables",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit both meaning directions from a bundle and triples")
    p.add_argument("--bundle", required=True)
    p.add_argument("--triples", required=True)
    p.add_argument("--threshold", type=float, default=sense_space.DEFAULT_THRESHOLD)
    p.add_argument("--out", required=True, help="directions JSON output path")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("edit", help="edit one prompt's target tokens toward a sense")
    p.add_argument("--bundle", required=True)
    p.add_argument("--directions", required=True)
    p.add_argument("--prompt-index", type=int)
    p.add_argument("--prompt-text")
    p.add_argument("--token-index", type=int, action="append")
    p.add_argument("--target-word")
    p.add_argument("--target-sense", type=int, choices=(1, 2), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=_cmd_edit)

    p = sub.add_parser("combine", help="weighted sum of two prompt encodings")
    p.add_argument("--bundle", required=True)
    p.add_argument("--prompt1-index", type=int)
    p.add_argument("--prompt1-text")
    p.add_argument("--prompt2-index", type=int)
    p.add_argument("--prompt2-text")
    p.add_argument("--alpha1", type=float, default=0.5)
    p.add_argument("--alpha2", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=_cmd_combine)

    p = sub.add_parser("score", help="dot products of token vectors with both directions")
    p.add_argument("--bundle", required=True)
    p.add_argument("--directions", required=True)
    p.add_argument("--prompt-index", type=int)
    p.add_argument("--token-index", type=int, action="append")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("stats", help="proportion reports and permutation tests")
    p.add_argument(
        "--mode",
        choices=("proportions", "pairs", "editing", "direct"),
        required=True,
    )
    p.add_argument("--counts", nargs="*", help="count CSV paths (default: bundled)")
    p.add_argument("--group-a", help="direct mode: comma-separated binary outcomes")
    p.add_argument("--group-b")
    p.add_argument("--seed", type=int)
    p.add_argument("--exact-cap", type=int, default=stats.SUITE_EXACT_CAP)
    p.add_argument("--draws", type=int, default=stats.DEFAULT_DRAWS)
    p.add_argument("--count-both", action="store_true",
                   help="count images realising both senses as successes")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("synth", help="generate a synthetic bundle with known structure")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--sentences", type=int, default=8)
    p.add_argument("--seed", type=int)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--context-scale", type=float, default=0.25)
    p.add_argument("--amb-coeffs", default="0.5,0.5")
    p.add_argument("--sense-coeff", type=float, default=1.0)
    p.add_argument("--out-bundle", required=True)
    p.add_argument("--out-triples", required=True)
    p.add_argument("--out-truth", required=True)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except SenseSpaceError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return exc.exit_code
    except FileNotFoundError as exc:
        json.dump({"error": "FileNotFound", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except (ValueError, OSError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
