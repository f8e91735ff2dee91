"""Optimize a 16-PAM input distribution at one SNR and show its structure.

Prints P_X, the induced XOR-class prior Pr(W_C) and both entropies as text
bars, and optionally saves the result JSON for later `macshaping eval`.
"""
import argparse

from macshaping import io
from macshaping.constellation import build_xor_classes, get_constellation
from macshaping.info import class_prior, cutset_bound, entropy_wc
from macshaping.optimizer import ShapingProblem, optimize


def bars(label, values, width=40):
    print(label)
    top = max(values)
    for i, v in enumerate(values):
        print(f"  {i:3d} {v:8.5f} {'#' * int(round(width * v / top))}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--constellation", default="pam16")
    ap.add_argument("--snr-db", type=float, default=14.0)
    ap.add_argument("--starts", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--asymmetric", action="store_true")
    ap.add_argument("--out")
    args = ap.parse_args()

    c = get_constellation(args.constellation)
    x = build_xor_classes(c)
    mode = "asymmetric" if args.asymmetric else "symmetric"
    res = optimize(ShapingProblem(c.name, args.snr_db, mode=mode, starts=args.starts,
                                  seed=args.seed), x)
    p, q = res.best_p.probs, res.best_q.probs
    pri = class_prior(p, q, x)

    bars("P_X", p)
    if args.asymmetric:
        bars("Q_X", q)
    bars("Pr(W_C)", pri)
    bound = cutset_bound(10 ** (args.snr_db / 10), c.signal_dimensions)
    print(f"rate {res.mi_bits:.4f} bits, cut-set {bound:.4f} bits")
    print(f"H(W_C) = {entropy_wc(pri):.4f}, H(X_A) = {entropy_wc(p):.4f}")
    print(f"best start {res.best_start} of {len(res.starts)}; "
          f"converged {sum(s.converged for s in res.starts)}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(io.dumps(res.to_json()))
        print(f"saved {args.out}")


if __name__ == "__main__":
    main()
