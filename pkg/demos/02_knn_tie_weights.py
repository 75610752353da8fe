"""The k-NN weight law, including exact distance ties.

With continuous inputs ties never happen and each of the k nearest points
gets weight 1/k.  On gridded or duplicated data the k-th distance can be
shared by several points; the weight law splits the remaining mass evenly
over that tie group so the weights stay a probability vector:

    weight = 1/k                for the m points strictly closer,
    weight = (k - m) / (p * k)  for the p points tied at the k-th distance.
"""

import numpy as np

from structrates import SampleSet, knn_weights

CASES = (
    # (points, k, note)
    (np.array([[1.0], [3.0], [-4.0]]), 2, "no ties: 1/k each"),
    (np.array([[1.0], [2.0], [-2.0]]), 2, "tie at the 2nd distance"),
    (np.array([[1.0], [-1.0], [2.0], [-2.0], [2.0]]), 3, "pair then triple"),
    (np.array([[1.0], [-1.0], [1.0], [-1.0]]), 1, "all four tied for 1st"),
)


def main():
    query = np.array([0.0])
    for points, k, note in CASES:
        data = SampleSet(points, np.zeros(len(points), dtype=int))
        dist = np.abs(points[:, 0] - query[0])
        w = knn_weights(query, data, k)
        print(f"{note}  (k = {k})")
        print(f"  distances: {dist}")
        print(f"  weights  : {np.round(w, 4)}   sum = {w.sum():.12f}")
        print()

    # the tie group never gets more than the strictly-closer points
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(2000):
        n = int(rng.integers(1, 25))
        pts = np.round(rng.uniform(-1, 1, size=(n, 2)) * 4) / 4
        data = SampleSet(pts, np.zeros(n, dtype=int))
        k = int(rng.integers(1, n + 1))
        w = knn_weights(np.zeros(2), data, k)
        worst = max(worst, abs(w.sum() - 1.0), float(w.max()) - 1.0 / k)
    print(f"2000 random gridded configs: max deviation from the law {worst:.2e}")


if __name__ == "__main__":
    main()
