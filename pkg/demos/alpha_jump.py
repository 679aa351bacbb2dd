"""Coefficient jumps up to 1e6 across the interface of the two-patch strip.

The error normalized by the alpha-weighted H2 seminorm of the exact solution
stays the same for every ratio.
"""

from iga_sipg.verification import alpha_study


def main():
    levels = range(1, 5)
    print("ratio    " + "  ".join(f"level {l}" for l in levels))
    for ratio in (1.0, 1e3, 1e6):
        errs = alpha_study(ratio, levels)
        print(f"{ratio:7.0e}  " + "  ".join(f"{e:.3e}" for e in errs))


if __name__ == "__main__":
    main()
