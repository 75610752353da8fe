"""Decoding over a 3-label simplex: regions, gaps, frontier distances.

Walks the probability simplex of a 3-class loss with asymmetric costs and
shows how the linear decode rule partitions it into polyhedral regions.
The frontier distance measures how far a conditional measure sits from the
nearest region boundary; the margin gap is the risk difference between the
best two predictions.  The two agree up to explicit constants.
"""

import numpy as np

from structrates import (
    decode,
    frontier_distance,
    margin_gap,
    risk_vector,
    sandwich_constants,
    three_class_loss,
)


def main():
    loss = three_class_loss()
    print("loss table (rows: predictions, columns: observations)")
    print("   ", "  ".join(f"{y}" for y in loss.y_labels))
    for z, row in zip(loss.z_labels, loss.matrix):
        print(f"  {z}:", "  ".join(f"{v:.0f}" for v in row))
    print()

    # the uniform measure: prediction "a" wins because mistaking it is cheap
    mu = np.full(3, 1.0 / 3.0)
    print("uniform measure mu = (1/3, 1/3, 1/3)")
    print(f"  risks   : {np.round(risk_vector(loss, mu), 4)}")
    print(f"  decode  : {decode(loss, mu)}")
    print(f"  gap     : {margin_gap(loss, mu):.4f}")
    print(f"  distance: {frontier_distance(loss, mu):.4f}"
          f"  (= 1 / (3 sqrt 3) = {1 / (3 * np.sqrt(3)):.4f})")
    print()

    # sweep an edge of the simplex and watch the decode flip
    print("sweep mu = (1-t, t, 0):")
    print(f"  {'t':>5}  {'decode':>6}  {'gap':>8}  {'distance':>8}")
    for t in np.linspace(0.0, 1.0, 11):
        mu = np.array([1.0 - t, t, 0.0])
        print(f"  {t:>5.2f}  {decode(loss, mu):>6}  "
              f"{margin_gap(loss, mu):>8.4f}  {frontier_distance(loss, mu):>8.4f}")
    print()

    c_lo, c_hi = sandwich_constants(loss)
    print(f"sandwich constants: {c_lo:.4f} * gap <= distance <= {c_hi:.4f} * gap")
    rng = np.random.default_rng(0)
    worst_lo = worst_hi = 0.0
    for _ in range(1000):
        mu = rng.dirichlet(np.ones(3))
        d, gap = frontier_distance(loss, mu), margin_gap(loss, mu)
        worst_lo = max(worst_lo, c_lo * gap - d)
        worst_hi = max(worst_hi, d - c_hi * gap)
    print(f"checked on 1000 random measures: max violations "
          f"{worst_lo:.2e} (lower), {worst_hi:.2e} (upper)")


if __name__ == "__main__":
    main()
