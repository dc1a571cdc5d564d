#!/usr/bin/env python3
"""Run the three verification scenarios on the reference fixture.

Writes JSON reports to ./isobispec-out and prints a summary.  Exit code 0
iff all verdicts are PASS.
"""

import sys
import time

from isobispec.harness import (RunConfig, run_crosscheck, run_verify_remark2,
                               run_verify_theorem1)


def main() -> int:
    out_dir = "isobispec-out"
    ok = True
    for name, runner, cfg in [
        ("theorem-1", run_verify_theorem1, RunConfig()),
        ("remark-2", run_verify_remark2, RunConfig(eigsign=-1,
                                                   alphas=(0, 1, -1, 2))),
        ("crosscheck", run_crosscheck, RunConfig()),
    ]:
        t0 = time.perf_counter()
        rep = runner(cfg)
        rep.write(out_dir, "json")
        print(rep.summary())
        print(f"({name}: {time.perf_counter() - t0:.1f}s)\n")
        ok &= rep.verdict
    print("OVERALL:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
