"""Spectral bounds of the SIPG matrix against the Q_h Gram matrix.

Shows how the lower bound depends on the penalty factor sigma0.
"""

from iga_sipg.assembly import SipgParameters
from iga_sipg.verification import coercivity_bounds


def main():
    print(f"{'sigma0':>6} {'p':>2} {'lambda_min':>10} {'lambda_max':>10}")
    for sigma0 in (0.5, 1.0, 4.0, 16.0):
        for p in (2, 4):
            lo, hi = coercivity_bounds("square2", p, 1, SipgParameters(sigma0=sigma0))
            print(f"{sigma0:6.1f} {p:>2} {lo:10.4f} {hi:10.4f}")


if __name__ == "__main__":
    main()
