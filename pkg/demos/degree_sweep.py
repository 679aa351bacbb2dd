"""Q_h error against the spline degree at a fixed level.

On the affine two-patch strip the smooth sine solution is approximated
spectrally, so the error drops by orders of magnitude with each degree.
"""

from iga_sipg.study import degree_sweep


def main():
    for name in ("square2", "footprint12"):
        errs = degree_sweep(name, 2, [2, 3, 4, 6])
        print(name + ": " + ", ".join(f"p={p}: {e:.3e}" for p, e in errs.items()))


if __name__ == "__main__":
    main()
