#!/usr/bin/env python3
"""Generate data/sample_mortality.csv.

Synthetic annual death probabilities for ages 70..110 from a Gompertz
hazard mu(x) = A * exp(B * (x - 70)); the one-year death probability is
qx = 1 - exp(-A * exp(B*(x-70)) * (exp(B) - 1) / B). The terminal age 110
is forced to qx = 1 so a cohort is extinguished by table end.

Run from the repository root:  python3 scripts/make_mortality_table.py
"""

import math
import os

A = 0.0191
B = 0.11
FIRST_AGE = 70
TERMINAL_AGE = 110


def qx(age: int) -> float:
    if age >= TERMINAL_AGE:
        return 1.0
    integrated = A * math.exp(B * (age - FIRST_AGE)) * (math.exp(B) - 1.0) / B
    return min(1.0, 1.0 - math.exp(-integrated))


def main() -> None:
    out = os.path.join(os.path.dirname(__file__), "..", "data", "sample_mortality.csv")
    with open(out, "w", newline="\n") as fh:
        fh.write("age,qx\n")
        for age in range(FIRST_AGE, TERMINAL_AGE + 1):
            fh.write(f"{age},{qx(age):.6f}\n")
    print(f"wrote {os.path.normpath(out)}")


if __name__ == "__main__":
    main()
