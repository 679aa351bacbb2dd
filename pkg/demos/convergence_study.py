"""h-refinement on the non-matching two-patch strip.

Prints the Q_h error table for p = 2 and p = 3 with the observed rates.
"""

from iga_sipg.study import StudyConfig, run_study


def main():
    cfg = StudyConfig(domain="square2-nonmatch", degrees=(2, 3), levels=(1, 2, 3, 4), timings=False)
    res = run_study(cfg)
    print(f"{'p':>2} {'level':>5} {'N':>6} {'error':>12} {'rate':>6}")
    for r in res.rows:
        rate = "" if r.rate is None else f"{r.rate:6.2f}"
        print(f"{r.p:>2} {r.level:>5} {r.N:>6} {r.e:12.4e} {rate:>6}")


if __name__ == "__main__":
    main()
