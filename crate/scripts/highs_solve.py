#!/usr/bin/env python3
"""Solve an MPS file with HiGHS and write `<name> <value>` lines.

Usage: highs_solve.py MODEL.mps SOLUTION.sol [time_limit_seconds]
"""
import sys

import highspy


def main():
    if len(sys.argv) < 3:
        sys.exit(__doc__)
    mps, sol = sys.argv[1], sys.argv[2]
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    if len(sys.argv) > 3:
        h.setOptionValue("time_limit", float(sys.argv[3]))
    if h.readModel(mps) != highspy.HighsStatus.kOk:
        sys.exit(f"cannot read {mps}")
    h.run()
    status = h.getModelStatus()
    if h.getInfo().primal_solution_status != 2:
        sys.exit(f"no feasible solution: {h.modelStatusToString(status)}")
    names = h.getLp().col_names_
    values = h.getSolution().col_value
    with open(sol, "w") as f:
        f.write(f"# {h.modelStatusToString(status)}\n")
        for n, v in zip(names, values):
            f.write(f"{n} {v!r}\n")


if __name__ == "__main__":
    main()
