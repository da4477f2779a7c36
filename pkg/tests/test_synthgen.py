import numpy as np
import pytest

from dismet.baselines import ProtocolParams, dci_disentanglement, factorvae_score, mig, sap
from dismet.errors import GridTooLarge, InputError, ShapeMismatch
from dismet.io import DatasetSpec
from dismet.med import med_score, topk_med
from dismet.synthgen import EncoderSpec, encode, factor_grid, grid_spec, parse_encoder

from conftest import replicated_grid


def test_factor_grid_full():
    g = factor_grid(grid_spec((2, 2)))
    assert g.values.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]
    d = factor_grid("dsprites")
    assert d.n == 737280 and d.values[-1].tolist() == [2, 5, 39, 31, 31]
    with pytest.raises(GridTooLarge):
        factor_grid("cars3d" if False else DatasetSpec("big", ("a", "b"), (10**4, 10**4)))


def test_factor_grid_sample_deterministic():
    a = factor_grid("shapes3d", "sample", 10, seed=0)
    b = factor_grid("shapes3d", "sample", 10, seed=0)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, factor_grid("shapes3d", "sample", 10, seed=1).values)
    with pytest.raises(InputError):
        factor_grid("shapes3d", "sample")


def test_encoders():
    g = factor_grid(grid_spec((2, 2)))
    assert np.array_equal(encode(g, EncoderSpec("identity")).values, g.values)
    dup = encode(g, EncoderSpec("duplicate", {"m": 2})).values
    assert np.array_equal(dup, g.values[:, [0, 1, 0, 1]])
    mix = encode(g, EncoderSpec("linear-mix", {"matrix": [[1, 2], [3, 4], [0, 1]]})).values
    assert np.array_equal(mix, g.values @ np.array([[1, 2], [3, 4], [0, 1]]).T)
    with pytest.raises(ShapeMismatch):
        encode(g, EncoderSpec("linear-mix", {"matrix": [[1, 2, 3]]}))
    rp = encode(g, EncoderSpec("random-projection", {"d": 1000, "seed": 1}))
    assert rp.values.shape == (4, 1000)
    assert np.array_equal(rp.values, encode(g, EncoderSpec("random-projection", {"d": 1000, "seed": 1})).values)
    t = encode(g, parse_encoder("random-projection:10:tanh", seed=1)).values
    assert np.all(np.abs(t) < 1)
    ext = encode(g, parse_encoder("identity+append-noise:2+append-constant:3"))
    assert ext.d == 7 and not ext.values[:, 4:].any()


def test_parse_encoder():
    st = parse_encoder("linear-mix:1,0;0.5,0.5+append-constant:2", seed=4)
    assert st[0].params["matrix"] == [[1.0, 0.0], [0.5, 0.5]]
    assert st[1].kind == "append-constant" and st[1].params["count"] == 2
    with pytest.raises(InputError):
        parse_encoder("bogus")


@pytest.mark.parametrize("cards", [(2, 2), (3, 4), (2, 3, 5)])
def test_identity_med_exactly_one(cards):
    g = replicated_grid(cards, 3)
    assert med_score(encode(g, EncoderSpec("identity")), g) == 1.0


def test_append_constant_leaves_metrics_unchanged():
    g = replicated_grid((3, 4), 20)
    rng = np.random.default_rng(0)
    X = g.values + 0.3 * rng.normal(size=(g.n, 2))
    X = np.hstack([X, rng.normal(size=(g.n, 1))])
    Xc = np.hstack([X, np.zeros((g.n, 3))])
    p = ProtocolParams(num_train=500, num_eval=300)
    assert med_score(X, g) == med_score(Xc, g)
    assert topk_med(X, g, 1) == topk_med(Xc, g, 1)
    assert mig(X, g) == mig(Xc, g)
    assert sap(X, g, p) == sap(Xc, g, p)
    assert dci_disentanglement(X, g) == pytest.approx(dci_disentanglement(Xc, g), abs=1e-12)
    assert factorvae_score(X, g, p) == factorvae_score(Xc, g, p)


def test_random_projection_seeds_give_similar_scores():
    g = factor_grid("smallnorb", "sample", 3000, seed=0)
    scores = []
    for seed in range(5):
        r = encode(g, EncoderSpec("random-projection", {"d": 50, "seed": seed}))
        scores.append(med_score(r, g, base="k"))
    mats = [encode(g, EncoderSpec("random-projection", {"d": 50, "seed": s})).values for s in (0, 1)]
    assert not np.array_equal(*mats)
    s = np.array(scores)
    assert np.all(np.abs(s - s.mean()) <= 3 * s.std() + 1e-12)
    assert s.std() < 0.05
