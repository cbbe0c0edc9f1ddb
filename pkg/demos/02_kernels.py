"""Walkthrough: turning count features into molecule-molecule kernels.

Run with ``python3 demos/02_kernels.py``.

A Gram matrix holds pairwise similarities for a whole dataset.  Two kernels
are available:

* ``cosine`` — the cosine of the angle between full feature vectors.
* ``nspdk`` — cosine per (height, distance-or-height) block, averaged over
  blocks, so that heights with huge counts cannot drown out sparse ones.

Both produce symmetric positive semidefinite matrices with unit diagonal,
which is what kernelized learners (see the SVM demo) require.
"""

import numpy as np

from submol import build_matrix, gram_matrix, height_features, parse_smiles

MOLECULES = [
    ("ethanol", "CCO"),
    ("propanol", "CCCO"),
    ("acetic acid", "CC(=O)O"),
    ("propionic acid", "CCC(=O)O"),
    ("benzene", "c1ccccc1"),
    ("toluene", "Cc1ccccc1"),
    ("hexane", "CCCCCC"),
]


def print_matrix(gram, names):
    width = max(len(n) for n in names)
    print(" " * (width + 2) + "  ".join(f"{n[:6]:>6s}" for n in names))
    for name, row in zip(names, gram):
        cells = "  ".join(f"{v:6.3f}" for v in row)
        print(f"{name:>{width}s}  {cells}")


def main():
    names = [name for name, _ in MOLECULES]
    vectors = [height_features(parse_smiles(s), [0, 1, 2]) for _, s in MOLECULES]
    data = build_matrix(vectors, labels=[1] * len(vectors), ids=names)
    print(f"{len(names)} molecules, {len(data.vocab.keys)} distinct feature keys\n")

    for kernel in ("cosine", "nspdk"):
        gram = gram_matrix(data, kernel)
        print(f"== {kernel} kernel ==")
        print_matrix(gram.values, list(gram.ids))
        eigs = np.linalg.eigvalsh(gram.values)
        print(f"symmetric: {np.array_equal(gram.values, gram.values.T)}, "
              f"min eigenvalue: {eigs.min():.2e} (>= 0 up to rounding)\n")

    gram = gram_matrix(data, "cosine").values
    print("Nearest neighbor of each molecule under the cosine kernel:")
    for i, name in enumerate(names):
        order = np.argsort(-gram[i])
        nearest = next(int(j) for j in order if j != i)
        print(f"  {name:>14s} -> {names[nearest]:<14s} "
              f"(similarity {gram[i, nearest]:.3f})")
    print()
    print("Acids pair with acids and the aromatic rings find each other,")
    print("while propanol's carbon chain pulls it toward hexane: similarity")
    print("follows shared neighborhoods, not name or class.")


if __name__ == "__main__":
    main()
