"""Rate-versus-SNR curves for 16-PAM and the horizontal gaps at a chosen rate.

Writes a CSV (snr_db,family,rate_bits) that any plotting tool can read.
The optimized family dominates the runtime; use --starts to trade quality
for speed.
"""
import argparse
import sys

from macshaping import io
from macshaping.constellation import get_constellation
from macshaping.info import UnreachableRateError
from macshaping.optimizer import FAMILIES, ShapingProblem, horizontal_gap, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--constellation", default="pam16")
    ap.add_argument("--snr-from", type=float, default=-5.0)
    ap.add_argument("--snr-to", type=float, default=25.0)
    ap.add_argument("--step", type=float, default=1.0)
    ap.add_argument("--families", default=",".join(FAMILIES))
    ap.add_argument("--starts", type=int, default=8)
    ap.add_argument("--gap-rate", type=float, default=2.5)
    ap.add_argument("--out", default="rate_sweep.csv")
    args = ap.parse_args()

    c = get_constellation(args.constellation)
    fams = args.families.split(",")
    rows = sweep(c, args.snr_from, args.snr_to, args.step, fams,
                 template=ShapingProblem(c.name, 0.0, starts=args.starts))
    with open(args.out, "w", newline="") as fh:
        fh.write(io.rows_to_csv(rows))
    print(f"wrote {len(rows)} rows to {args.out}")

    if "optimized" in fams:
        for other in ("uniform", "cutset", "mb"):
            if other not in fams:
                continue
            try:
                gap = horizontal_gap(rows, other, "optimized", args.gap_rate)
                print(f"gap {other} - optimized at {args.gap_rate} bits: {gap:.2f} dB")
            except UnreachableRateError as exc:
                print(f"gap {other}: {exc}", file=sys.stderr)


if __name__ == "__main__":
    main()
