#!/usr/bin/env python3
"""Solve an LP-format model with HiGHS and write a wnopt solution file.

usage: highs_solve.py MODEL SOLUTION GAP TIME
"""
import sys

import highspy


def main(argv):
    if len(argv) != 5:
        sys.stderr.write(__doc__)
        return 2
    model, solution, gap, time_limit = argv[1], argv[2], float(argv[3]), float(argv[4])
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", gap)
    h.setOptionValue("time_limit", time_limit)
    h.setOptionValue("random_seed", 0)
    h.setOptionValue("threads", 1)
    if h.readModel(model) != highspy.HighsStatus.kOk:
        sys.stderr.write("cannot read model %s\n" % model)
        return 1
    h.run()
    status = h.getModelStatus()
    info = h.getInfo()
    ms = highspy.HighsModelStatus
    has_point = info.primal_solution_status == 2  # kSolutionStatusFeasible
    if status == ms.kOptimal:
        name = "optimal"
    elif status in (ms.kInfeasible,):
        name = "infeasible"
    elif status in (ms.kUnbounded, ms.kUnboundedOrInfeasible):
        name = "unbounded" if status == ms.kUnbounded else "infeasible"
    elif status in (ms.kTimeLimit, ms.kIterationLimit, ms.kSolutionLimit, ms.kInterrupt):
        gap_now = info.mip_gap if has_point else float("inf")
        name = "feasible_within_gap" if has_point and gap_now <= gap else "timed_out"
    else:
        sys.stderr.write("unexpected HiGHS status: %s\n" % h.modelStatusToString(status))
        return 1

    with open(solution, "w") as out:
        out.write("status %s\n" % name)
        if name in ("optimal", "feasible_within_gap", "timed_out") and has_point:
            mip_gap = info.mip_gap if info.mip_gap < float("inf") else 0.0
            if name == "optimal":
                mip_gap = min(mip_gap, gap)
            out.write("objective %.17g\n" % info.objective_function_value)
            out.write("gap %.17g\n" % max(0.0, mip_gap))
            lp = h.getLp()
            values = h.getSolution().col_value
            for j, v in enumerate(values):
                out.write("%s %.17g\n" % (lp.col_names_[j], v))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
