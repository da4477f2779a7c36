import csv
import math

import numpy as np
import pytest

from dismet.core import FactorTable
from dismet.errors import EmptySelection, NotAGrid, RankDeficientWarning
from dismet.med import (
    cooccurrence,
    dimension_scores,
    importance_from_raw,
    importance_matrix,
    manipulation_variance,
    med_score,
    pca_reduce,
    topk_med,
    topk_select,
    write_heatmap,
)
from dismet.mi import MIMatrix, mi_matrix
from dismet.scenarios import ScenarioSpec, generate

from conftest import replicated_grid
from test_mi import mi_oracle

LN2 = math.log(2)


def test_importance_identity():
    imp = importance_matrix(MIMatrix(np.diag([LN2, LN2])))
    assert np.array_equal(imp.R, np.eye(2))
    assert imp.S.tolist() == [1.0, 1.0]
    assert imp.rho.tolist() == [0.5, 0.5]


def test_importance_copy_average_d3():
    f, r = generate(ScenarioSpec("copy-average", 3))
    imp = importance_matrix(mi_matrix(r, f))
    assert np.allclose(imp.R, [[2 / 3, 0], [0, 2 / 3], [1 / 3, 1 / 3]], atol=1e-15, rtol=0)
    assert np.allclose(imp.P, [[1, 0], [0, 1], [0.5, 0.5]], atol=1e-15, rtol=0)
    assert np.allclose(imp.rho, [1 / 3] * 3, atol=1e-15, rtol=0)


def test_importance_all_zero():
    imp = importance_matrix(MIMatrix(np.zeros((3, 2))))
    assert not imp.R.any() and not imp.rho.any() and not imp.S.any()
    assert imp.score == 0.0


def test_importance_invariants():
    rng = np.random.default_rng(0)
    M = rng.random((6, 3))
    M[:, 2] = 0
    M[4] = 0
    imp = importance_from_raw(M)
    sums = imp.R.sum(axis=0)
    assert np.allclose(sums[:2], 1) and sums[2] == 0
    rows = imp.P.sum(axis=1)
    assert np.allclose(np.delete(rows, 4), 1) and rows[4] == 0
    assert imp.rho.sum() == pytest.approx(1)


def test_dimension_scores():
    assert dimension_scores(np.array([[1.0, 0.0]])).tolist() == [1.0]
    assert dimension_scores(np.array([[0.5, 0.5]]))[0] == pytest.approx(1 - LN2, abs=1e-15)
    assert dimension_scores(np.array([[0.5, 0.5]]), base="k")[0] == pytest.approx(0.0, abs=1e-15)
    assert dimension_scores(np.array([[0.0, 0.0]])).tolist() == [0.0]


@pytest.mark.parametrize("d", [3, 1000])
def test_med_copy_average(d):
    f, r = generate(ScenarioSpec("copy-average", d))
    assert abs(med_score(r, f) - (1 - (d - 2) / d * LN2)) < 1e-12


def test_med_weighted_mix_and_duplicated():
    for d in (2, 5):
        f, r = generate(ScenarioSpec("weighted-mix", d))
        assert abs(med_score(r, f) - (1 - LN2)) < 1e-12
    f, r = generate(ScenarioSpec("duplicated", 6))
    assert med_score(r, f) == 1.0


def test_topk_select_duplicated():
    f, r = generate(ScenarioSpec("duplicated", 4))
    imp = importance_matrix(mi_matrix(r, f))
    assert topk_select(imp.R, imp.S, 2).picked == (0, 1, 2, 3)
    assert topk_select(imp.R, imp.S, 1).picked == (0, 1)


def test_topk_select_empty_group_and_ties():
    R = np.array([[0.5, 0.5, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    S = np.array([0.3, 1.0, 0.0])
    sel = topk_select(R, S, 1)
    # row 0 ties between factors 0 and 1 -> factor 0; row 2 is uninformative
    assert sel.groups == ((0, 1), (), ())
    assert sel.picked_per_factor == ((1,), (), ())
    assert sel.picked == (1,)


def test_topk_med_examples():
    f, r = generate(ScenarioSpec("duplicated", 4))
    assert topk_med(r, f, 2) == 1.0
    g = replicated_grid((3, 4))
    assert topk_med(g.values.astype(float), g, 1) == 1.0
    f, r = generate(ScenarioSpec("copy-average", 1000))
    score, sel = topk_med(r, f, 1, return_selection=True)
    assert score == 1.0 and sel.picked == (0, 1)
    with pytest.raises(EmptySelection):
        topk_med(np.zeros((4, 3)), f, 1)


def test_topk_med_at_least_med_on_scenarios():
    for kind in ("duplicated", "copy-average", "weighted-mix"):
        for d in (3, 4, 10, 100):
            f, r = generate(ScenarioSpec(kind, d))
            for k in (1, 2, 3):
                assert topk_med(r, f, k) >= med_score(r, f) - 1e-12


def test_cooccurrence_examples():
    f, r = generate(ScenarioSpec("duplicated", 4))
    assert np.allclose(cooccurrence(mi_matrix(r, f)), np.eye(2), atol=1e-15, rtol=0)
    assert np.allclose(cooccurrence(np.array([[0.3, 0.3]])), np.ones((2, 2)))
    assert cooccurrence(np.array([[0.3, 0.0]])).tolist() == [[1.0, 0.0], [0.0, 0.0]]


def test_cooccurrence_copy_average_d4_against_enumeration():
    f, r = generate(ScenarioSpec("copy-average", 4))
    v = f.values.tolist()
    cols = [[row[i] for row in r.values.tolist()] for i in range(4)]
    I = [[mi_oracle(c, [row[j] for row in v]) for j in range(2)] for c in cols]
    dot = sum(a * b for a, b in I)
    n0 = math.sqrt(sum(a * a for a, _ in I))
    n1 = math.sqrt(sum(b * b for _, b in I))
    expected = dot / (n0 * n1)
    C = cooccurrence(mi_matrix(r, f))
    assert C[0, 1] == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(1 / 3, abs=1e-12)


def test_manipulation_variance():
    g = replicated_grid((3, 4))
    X = g.values.astype(float)
    prof = manipulation_variance(X, g, 1)
    assert prof[0] == 0 and prof[1] > 0
    f, r = generate(ScenarioSpec("duplicated", 6))
    prof = manipulation_variance(r, f, 0)
    assert np.flatnonzero(prof).tolist() == [0, 2, 4]
    Xc = np.hstack([X, np.full((g.n, 1), 2.0)])
    assert manipulation_variance(Xc, g, 0)[2] == 0
    one = manipulation_variance(X, g, 0, assignment=0)
    assert one[0] == pytest.approx(np.var([0, 1, 2]))
    sub = manipulation_variance(Xc, g, 0, columns=[2, 0])
    assert sub.shape == (2,) and sub[0] == 0
    with pytest.raises(NotAGrid):
        manipulation_variance(X[:5], g.take(np.arange(5)), 0)


def test_pca_axis_aligned_and_full_rank():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(500, 3)) * np.array([1.0, 5.0, 2.0])
    Z = pca_reduce(X, 3).values
    Xc = X - X.mean(axis=0)
    # components follow variance order: dim1, dim2, dim0
    assert np.argmax(np.abs(np.corrcoef(Z.T, Xc.T)[0, 3:])) == 1
    assert np.argmax(np.abs(np.corrcoef(Z.T, Xc.T)[1, 3:])) == 2
    # orthogonal transform: norms preserved
    assert np.allclose(np.linalg.norm(Z, axis=1), np.linalg.norm(Xc, axis=1))


def test_pca_first_axis_matches_closed_form():
    rng = np.random.default_rng(1)
    X = rng.multivariate_normal([0, 0], [[3.0, 1.2], [1.2, 1.0]], size=2000)
    Xc = X - X.mean(axis=0)
    a, b, c = (Xc[:, 0] ** 2).mean(), (Xc[:, 0] * Xc[:, 1]).mean(), (Xc[:, 1] ** 2).mean()
    lam = (a + c) / 2 + math.sqrt(((a - c) / 2) ** 2 + b * b)
    axis = np.array([b, lam - a])
    axis /= np.linalg.norm(axis)
    z = pca_reduce(X, 1).values[:, 0]
    w = np.linalg.lstsq(Xc, z, rcond=None)[0]
    w /= np.linalg.norm(w)
    angle = math.acos(min(1.0, abs(float(w @ axis))))
    assert angle < 1e-6
    assert w[np.argmax(np.abs(w))] > 0


def test_pca_rank_deficient_pads():
    X = np.outer(np.arange(10.0), [1.0, 2.0, 3.0])
    with pytest.warns(RankDeficientWarning):
        Z = pca_reduce(X, 2).values
    assert not Z[:, 1].any()


def test_heatmap(tmp_path):
    f, r = generate(ScenarioSpec("copy-average", 4))
    imp = importance_matrix(mi_matrix(r, f))
    write_heatmap(imp, f.names, tmp_path / "h.csv")
    rows = list(csv.reader(open(tmp_path / "h.csv")))
    assert rows[0] == ["factor", "dim0", "dim1", "dim2", "dim3"]
    assert [r[0] for r in rows[1:]] == ["F0", "F1"]
    for row in rows[1:]:
        assert sum(float(x) for x in row[1:]) == pytest.approx(1.0)
