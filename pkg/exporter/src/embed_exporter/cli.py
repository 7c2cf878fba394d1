"""embed-export: encode a JSONL corpus into the toolkit's embedding format."""

from __future__ import annotations

import argparse
import sys

from . import ExportError, __version__
from .exporter import ExportJob, run_export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-export",
        description="Run a pre-trained sentence encoder over corpus JSONL and write embedding files.",
    )
    parser.add_argument("--version", action="version", version=f"embed-export {__version__}")
    parser.add_argument("--input", required=True, help="corpus JSONL path")
    parser.add_argument("--encoder", required=True,
                        help="sentence-transformers model name or local path")
    parser.add_argument("--granularity", choices=("document", "sentence"), default="document")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--format", choices=("tsv", "binary"), default="tsv")
    parser.add_argument("--out", required=True, help="output embedding file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(
        input_path=args.input,
        encoder=args.encoder,
        granularity=args.granularity,
        output_path=args.out,
        batch_size=args.batch_size,
        output_format=args.format,
    )
    try:
        n = run_export(job)
    except ExportError as e:
        print(f"embed-export: error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"embed-export: error: {e}", file=sys.stderr)
        return 1
    print(f"exported {n} vectors -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
