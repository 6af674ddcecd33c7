"""Bridge CLI: export embeddings, generate images from bundles."""

from __future__ import annotations

import argparse
import json
import sys

from sensespace.errors import SenseSpaceError

from .export import ExportJob, export_embeddings
from .generate import DEFAULT_GUIDANCE, DEFAULT_MODEL, generate_images


def _cmd_export(args) -> None:
    job = ExportJob(
        encoder=args.encoder,
        out_bundle=args.out,
        prompts=args.prompt if args.prompt else None,
        triples_path=args.triples,
        out_triples=args.out_triples,
        padding_length=args.padding,
        layer_tag=args.layer_tag,
    )
    bundle = export_embeddings(job)
    json.dump(
        {
            "out": str(args.out),
            "prompts": len(bundle.prompts),
            "dim": bundle.dim,
            "encoder_tag": bundle.encoder_tag,
            "out_triples": str(args.out_triples) if args.out_triples else None,
        },
        sys.stdout,
    )
    sys.stdout.write("\n")


def _cmd_generate(args) -> None:
    manifest = generate_images(
        bundle_path=args.bundle,
        out_dir=args.out_dir,
        prompt_index=args.prompt_index,
        prompt_text=args.prompt_text,
        n_images=args.n_images,
        seed=args.seed,
        guidance_scale=args.guidance_scale,
        model_id=args.model,
    )
    json.dump(manifest, sys.stdout)
    sys.stdout.write("\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensebridge",
        description="export token embeddings into bundles and feed bundles "
        "to an image-generation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="encode prompts or triples into a bundle")
    p.add_argument("--encoder", default="clip:openai/clip-vit-large-patch14",
                   help="hash:<dim> or clip:<model-id-or-path>")
    p.add_argument("--prompt", action="append", help="prompt text (repeatable)")
    p.add_argument("--triples", help="triples JSON to encode and reindex")
    p.add_argument("--out", required=True, help="bundle output path")
    p.add_argument("--out-triples", help="reindexed triples output path")
    p.add_argument("--padding", type=int, help="padded sequence length")
    p.add_argument("--layer-tag", default="final_hidden")
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("generate", help="generate images conditioned on a bundle prompt")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--prompt-index", type=int)
    p.add_argument("--prompt-text")
    p.add_argument("--n-images", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--guidance-scale", type=float, default=DEFAULT_GUIDANCE)
    p.add_argument("--model", default=DEFAULT_MODEL)
    p.set_defaults(func=_cmd_generate)

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
