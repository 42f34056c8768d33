"""`render`: turn run artifacts into figure images.

Exit codes: 0 on success, 2 on schema violations or bad arguments,
1 on anything else.
"""

from __future__ import annotations

import argparse
import sys

from . import figures
from .schemas import SchemaError

KINDS = {
    "summary_bars": figures.summary_bars,
    "density_series": figures.density_series,
    "centrality_series": figures.centrality_series,
    "snapshots": figures.snapshots,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="render", description="Render run artifacts into figures"
    )
    parser.add_argument("--kind", required=True, choices=sorted(KINDS))
    parser.add_argument("--in", dest="inputs", required=True, nargs="+",
                        help="input CSV/JSONL artifact(s)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--title", default="")
    parser.add_argument("--times", default=None,
                        help="snapshot steps, comma separated (default 0,5,10,15,20)")
    parser.add_argument("--episode", type=int, default=0,
                        help="episode index for snapshots")
    args = parser.parse_args(argv)

    kwargs = {}
    if args.kind == "snapshots":
        if args.times:
            try:
                kwargs["times"] = [int(x) for x in args.times.split(",")]
            except ValueError:
                print(f"render: bad --times value {args.times!r}", file=sys.stderr)
                return 2
        kwargs["episode"] = args.episode
    try:
        KINDS[args.kind](args.inputs, args.out, title=args.title, **kwargs)
    except FileNotFoundError as exc:
        print(f"render: input not found: {exc.filename}", file=sys.stderr)
        return 2
    except SchemaError as exc:
        print(f"render: schema error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"render: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"render: wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
