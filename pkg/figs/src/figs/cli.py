"""Command line entry point: `figs render --spec spec.json`.

The spec file is a JSON object with keys kind, inputs (role -> path), out,
and optional style; relative input and output paths resolve against the spec
file's directory.
"""

import argparse
import json
import os
import sys

from .render import KINDS, FigureSpec, render


def _resolve(base: str, path: str) -> str:
    return path if os.path.isabs(path) else os.path.join(base, path)


def _load_spec(path: str) -> FigureSpec:
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("kind", "inputs", "out"):
        if key not in doc:
            raise ValueError(f"spec is missing {key!r}")
    base = os.path.dirname(os.path.abspath(path))
    inputs = {role: _resolve(base, p) for role, p in doc["inputs"].items()}
    return FigureSpec(kind=doc["kind"], inputs=inputs,
                      out=_resolve(base, doc["out"]),
                      style=doc.get("style", {}))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="figs",
        description="render figures from experiment output files")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render",
                       help=f"render one figure (kinds: {', '.join(KINDS)})")
    r.add_argument("--spec", required=True, help="path to the figure spec JSON")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(_load_spec(args.spec))
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
