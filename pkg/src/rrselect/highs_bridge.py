"""External-solver bridge backed by HiGHS.

Usage: ``python -m rrselect.highs_bridge MODEL.lp SOLUTION.sol``. Suitable
as the solver command template ``python -m rrselect.highs_bridge {model} {solution}``.
"""

import sys
from pathlib import Path

from .mip_export import read_lp, solve_highs, write_solution


def main(argv=None):
    args = sys.argv[1:] if argv is None else argv
    if len(args) != 2:
        print(__doc__.strip(), file=sys.stderr)
        return 1
    model = read_lp(Path(args[0]).read_text(encoding="utf-8"))
    Path(args[1]).write_text(write_solution(solve_highs(model)), encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main())
