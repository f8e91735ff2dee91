"""Print the PAM and QAM reproduction reports.

    python scripts/reproduce_tables.py            # both tables
    python scripts/reproduce_tables.py --table 1 --skip-mb
"""
import argparse

from macshaping import reproduce


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--table", type=int, choices=[1, 2])
    ap.add_argument("--skip-mb", action="store_true")
    ap.add_argument("--starts", type=int, default=8, help="optimizer starts for the QAM table")
    args = ap.parse_args()

    if args.table in (None, 1):
        checks = reproduce.table1_checks(include_mb=not args.skip_mb)
        checks.append(reproduce.asymmetric_pair_check())
        print("16-PAM\n" + reproduce.report(checks) + "\n")
    if args.table in (None, 2):
        checks = reproduce.table2_checks(include_mb=not args.skip_mb, starts=args.starts)
        print("16-QAM\n" + reproduce.report(checks))


if __name__ == "__main__":
    main()
