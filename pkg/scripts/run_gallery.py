"""Run the built-in gallery and print one line per system.

    python scripts/run_gallery.py [-N 32] [--seed 24301] [--out gallery.json]
"""

import argparse
from pathlib import Path

from evodich import io
from evodich.theorems import DEFAULT_SEED, headline, run_gallery


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-N", type=int, default=32)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    entries = run_gallery(N=args.N, seed=args.seed)
    print(f"{'system':24s} {'expected':18s} {'verdict':18s} {'max Re sigma(A(t))':>19s}  tables")
    for e in entries:
        tables = " ".join(f"{t.check}={t.status}" for t in e.tables)
        print(f"{e.system.name:24s} {e.system.expected:18s} {e.verdict:18s} {e.pointwise_max_real:19.6f}  {tables}")
        if e.error:
            print(f"    error: {e.error}")
    h = headline(entries)
    print(
        f"\n{h['system']}: pointwise max Re = {h['pointwise_max_real_part']:.6f}, "
        f"verdict {h['verdict']}, growth rate {h['growth_rate']:.6f} -> headline holds: {h['holds']}"
    )
    if args.out:
        doc = {"seed": args.seed, "N": args.N, "systems": [e.to_dict() for e in entries], "headline": h}
        args.out.write_text(io.dumps(doc))


if __name__ == "__main__":
    main()
