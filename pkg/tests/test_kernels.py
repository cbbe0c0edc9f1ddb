"""Kernel tests with hand-computed similarity values."""

import io
import math
import random
import warnings

import numpy as np
import pytest
import scipy.sparse as sp

from submol.features import DatasetMatrix, FeatureVocabulary, build_matrix, height_features
from submol.graph import parse_smiles
from submol.kernels import (
    GramMatrix,
    KernelError,
    ZeroRowWarning,
    cosine_kernel,
    gram_matrix,
    kernel_feature_rows,
    load_gram,
    nspdk_kernel,
    save_gram,
)


def matrix_from(rows, labels, vocab=None):
    X = sp.csr_matrix(np.asarray(rows, dtype=float))
    ids = tuple(str(i) for i in range(len(rows)))
    return DatasetMatrix(X, np.asarray(labels), ids, vocab)


# --- cosine ----------------------------------------------------------------


def test_cosine_hand_value():
    # (1,2)·(2,1) / (sqrt5 * sqrt5) = 4/5
    assert cosine_kernel([1.0, 2.0], [2.0, 1.0]) == pytest.approx(0.8, abs=1e-15)


def test_cosine_self_similarity_is_one():
    assert cosine_kernel([3.0, 4.0], [3.0, 4.0]) == pytest.approx(1.0, abs=1e-15)


def test_cosine_orthogonal_rows():
    assert cosine_kernel([1.0, 0.0], [0.0, 2.0]) == 0.0


def test_cosine_scale_invariance():
    rnd = random.Random(3)
    for _ in range(20):
        x = [rnd.uniform(0, 5) for _ in range(6)]
        y = [rnd.uniform(0, 5) for _ in range(6)]
        base = cosine_kernel(x, y)
        scaled = cosine_kernel([7 * v for v in x], [0.25 * v for v in y])
        assert scaled == pytest.approx(base, abs=1e-12)


def test_cosine_zero_row_warns_and_returns_zero():
    with pytest.warns(ZeroRowWarning):
        assert cosine_kernel([0.0, 0.0], [1.0, 1.0]) == 0.0


def test_cosine_accepts_sparse_rows():
    x = sp.csr_matrix([[1.0, 2.0]])
    y = sp.csr_matrix([[2.0, 1.0]])
    assert cosine_kernel(x, y) == pytest.approx(0.8, abs=1e-15)


# --- blockwise kernel ------------------------------------------------------


def test_nspdk_half_identical_blocks():
    # block 0 identical (cosine 1), block 1 orthogonal (cosine 0) -> mean 0.5
    blocks = [np.array([0, 1]), np.array([2, 3])]
    x = [1.0, 2.0, 1.0, 0.0]
    y = [1.0, 2.0, 0.0, 3.0]
    assert nspdk_kernel(x, y, blocks) == pytest.approx(0.5, abs=1e-15)


def test_nspdk_empty_block_contributes_zero():
    blocks = [np.array([0]), np.array([1])]
    x = [1.0, 0.0]
    y = [1.0, 5.0]
    # second block: x side is all zero -> contributes 0, mean is 1/2
    assert nspdk_kernel(x, y, blocks) == pytest.approx(0.5, abs=1e-15)


def test_nspdk_requires_blocks():
    with pytest.raises(KernelError, match="block"):
        nspdk_kernel([1.0], [1.0], [])


def test_nspdk_single_block_equals_cosine():
    rnd = random.Random(11)
    blocks = [np.arange(5)]
    for _ in range(10):
        x = [rnd.uniform(0, 3) for _ in range(5)]
        y = [rnd.uniform(0, 3) for _ in range(5)]
        assert nspdk_kernel(x, y, blocks) == pytest.approx(
            cosine_kernel(x, y), abs=1e-12
        )


# --- rectangular rows and gram ---------------------------------------------


def test_kernel_feature_rows_hand_matrix():
    train = matrix_from([[1.0, 0.0], [1.0, 1.0]], [1, -1])
    rows = matrix_from([[0.0, 2.0]], [1])
    K = kernel_feature_rows(train, rows, "cosine")
    assert K.shape == (1, 2)
    assert K[0, 0] == pytest.approx(0.0, abs=1e-15)
    assert K[0, 1] == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_gram_equals_rectangular_path_exactly():
    rnd = random.Random(4)
    rows = [[rnd.uniform(0, 4) for _ in range(6)] for _ in range(7)]
    data = matrix_from(rows, [1, -1] * 3 + [1])
    gram = gram_matrix(data, "cosine")
    rect = kernel_feature_rows(data, data, "cosine")
    assert np.array_equal(gram.values, rect)
    assert gram.ids == data.ids


def test_gram_symmetry_and_unit_diagonal():
    vectors = [
        height_features(parse_smiles(s), [0, 1])
        for s in ("CCC", "CCO", "CC(=O)O", "c1ccccc1")
    ]
    data = build_matrix(vectors, [1, 1, -1, -1])
    gram = gram_matrix(data, "cosine")
    assert np.allclose(gram.values, gram.values.T, atol=1e-15)
    assert np.allclose(np.diag(gram.values), 1.0, atol=1e-12)
    eigvals = np.linalg.eigvalsh(gram.values)
    assert eigvals.min() >= -1e-10


def test_nspdk_gram_on_real_features():
    vectors = [
        height_features(parse_smiles(s), [0, 1]) for s in ("CCC", "CCO", "CCN")
    ]
    data = build_matrix(vectors, [1, -1, 1])
    gram = gram_matrix(data, "nspdk")
    assert np.allclose(gram.values, gram.values.T, atol=1e-15)
    assert np.allclose(np.diag(gram.values), 1.0, atol=1e-12)
    # off-diagonal entries are strict means of per-block cosines
    blocks = [cols for _, cols in sorted(data.vocab.blocks().items())]
    dense = data.dense()
    expected = nspdk_kernel(dense[0], dense[1], blocks)
    assert gram.values[0, 1] == pytest.approx(expected, abs=1e-12)


def test_nspdk_rows_require_vocab():
    data = matrix_from([[1.0, 0.0], [0.0, 1.0]], [1, -1])
    with pytest.raises(KernelError, match="vocabulary"):
        kernel_feature_rows(data, data, "nspdk")


def test_nspdk_rejects_mismatched_vocabs():
    va = FeatureVocabulary(("0|a", "0|b"), (1.0, 2.0))
    vb = FeatureVocabulary(("0|a", "0|c"), (1.0, 2.0))
    a = matrix_from([[1.0, 0.0]], [1], vocab=va)
    b = matrix_from([[1.0, 0.0]], [1], vocab=vb)
    with pytest.raises(KernelError, match="block structure"):
        kernel_feature_rows(a, b, "nspdk")


def test_unknown_kernel_rejected():
    data = matrix_from([[1.0]], [1])
    with pytest.raises(KernelError, match="unknown kernel"):
        kernel_feature_rows(data, data, "tanimoto")


def test_mismatched_widths_rejected():
    a = matrix_from([[1.0, 2.0]], [1])
    b = matrix_from([[1.0]], [1])
    with pytest.raises(KernelError, match="widths"):
        kernel_feature_rows(a, b, "cosine")


def test_zero_row_in_matrix_warns_and_gives_zero_similarity():
    data = matrix_from([[0.0, 0.0], [1.0, 1.0]], [1, -1])
    with pytest.warns(ZeroRowWarning):
        gram = gram_matrix(data, "cosine")
    assert gram.values[0, 0] == 0.0
    assert gram.values[0, 1] == 0.0
    assert gram.values[1, 1] == pytest.approx(1.0, abs=1e-15)


def test_nonzero_matrix_does_not_warn():
    data = matrix_from([[1.0, 0.0], [1.0, 1.0]], [1, -1])
    with warnings.catch_warnings():
        warnings.simplefilter("error", ZeroRowWarning)
        gram_matrix(data, "cosine")


# --- gram files -------------------------------------------------------------


def test_gram_file_round_trip():
    rnd = random.Random(9)
    rows = [[rnd.uniform(0, 2) for _ in range(4)] for _ in range(5)]
    gram = gram_matrix(matrix_from(rows, [1, -1, 1, -1, 1]), "cosine")
    out = io.StringIO()
    save_gram(out, gram)
    text = out.getvalue()
    assert text.splitlines()[0] == "5"
    loaded = load_gram(io.StringIO(text), ids=gram.ids)
    # %.17g keeps every float bit for doubles
    assert np.array_equal(loaded.values, gram.values)
    assert loaded.ids == gram.ids


def test_load_gram_rejects_malformed():
    with pytest.raises(ValueError, match="row count"):
        load_gram(io.StringIO("not-a-number\n"))
    with pytest.raises(ValueError, match="entries"):
        load_gram(io.StringIO("2\n1.0 0.0\n1.0\n"))


def test_gram_matrix_shape_validation():
    with pytest.raises(ValueError, match="square"):
        GramMatrix(np.ones((2, 3)), ("a", "b"))
    with pytest.raises(ValueError, match="square"):
        GramMatrix(np.ones((2, 2)), ("a", "b", "c"))
