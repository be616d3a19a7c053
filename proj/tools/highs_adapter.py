#!/usr/bin/env python3
"""External MILP solver adapter backed by HiGHS (highspy).

Usage: highs_adapter.py MODEL.mps SOLUTION.txt REL_GAP TIME_LIMIT

Writes a solution file with lines "status <s>", "objective <v>",
"bound <v>" and one "<column> <value>" line per column.
"""
import sys

import highspy


def main(argv):
    if len(argv) != 5:
        print(__doc__, file=sys.stderr)
        return 1
    model_path, solution_path, rel_gap, time_limit = argv[1], argv[2], float(argv[3]), float(argv[4])
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", rel_gap)
    h.setOptionValue("time_limit", time_limit)
    h.setOptionValue("threads", 1)
    if h.readModel(model_path) != highspy.HighsStatus.kOk:
        print("cannot read model", file=sys.stderr)
        return 1
    h.run()
    status = h.getModelStatus()
    S = highspy.HighsModelStatus
    info = h.getInfo()
    has_solution = info.primal_solution_status == 2
    if status == S.kOptimal:
        text = "optimal" if info.mip_gap <= 1e-9 or info.mip_gap != info.mip_gap else "gap_reached"
    elif status in (S.kInfeasible,):
        text = "infeasible"
    elif status == S.kTimeLimit:
        text = "time_limit"
    elif status in (S.kSolutionLimit, S.kIterationLimit):
        text = "node_limit"
    else:
        print("unexpected HiGHS status: %s" % h.modelStatusToString(status), file=sys.stderr)
        return 1
    with open(solution_path, "w") as out:
        out.write("status %s\n" % text)
        if has_solution and text != "infeasible":
            out.write("objective %r\n" % info.objective_function_value)
            out.write("bound %r\n" % info.mip_dual_bound)
            lp = h.getLp()
            values = h.getSolution().col_value
            for name, value in zip(lp.col_names_, values):
                out.write("%s %r\n" % (name, float(value)))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
