import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from dismet.baselines import AnalyticDerivative, dci_disentanglement, mig, sap
from dismet.errors import InputError, UnsupportedBase
from dismet.med import med_score
from dismet.scenarios import (
    ScenarioSpec,
    analytic_med,
    derivative_matrix,
    generate,
    dci_closed_form,
    simplified_dci,
    simplified_dci_importance,
    sweep,
    write_sweep_csv,
)

LN2 = math.log(2)


def dci_oracle(R):
    """sum_i rho_i (1 - H(P_i)) in plain Python over a list-of-rows matrix."""
    total = sum(sum(row) for row in R)
    out = 0.0
    for row in R:
        s = sum(row)
        if s == 0:
            continue
        h = -sum(x / s * math.log(x / s) for x in row if x > 0)
        out += s / total * (1 - h)
    return out


def test_generate_examples():
    f, r = generate(ScenarioSpec("duplicated", 4))
    assert f.n == 4 and np.array_equal(r.values, f.values[:, [0, 1, 0, 1]])
    f, r = generate(ScenarioSpec("copy-average", 3))
    assert set(r.values[:, 2].tolist()) == {0.0, 0.5, 1.0}
    f, r = generate(ScenarioSpec("weighted-mix", 2))
    v0, v1 = f.values[:, 0], f.values[:, 1]
    assert np.allclose(r.values, np.stack([v0 / 3 + 2 * v1 / 3, v1 / 3 + 2 * v0 / 3], 1))
    f, r = generate(ScenarioSpec("copy-average", 3, replication=5))
    assert f.n == 20


def test_spec_validation():
    with pytest.raises(InputError):
        ScenarioSpec("copy-average", 2)
    with pytest.raises(InputError):
        ScenarioSpec("duplicated", 1)
    with pytest.raises(InputError):
        ScenarioSpec("other", 5)


@pytest.mark.parametrize("kind", ["duplicated", "copy-average", "weighted-mix"])
@pytest.mark.parametrize("d", [3, 4, 10, 100, 1000])
def test_med_matches_closed_form(kind, d):
    spec = ScenarioSpec(kind, d)
    f, r = generate(spec)
    assert abs(med_score(r, f) - analytic_med(spec)) < 1e-9


def test_analytic_values():
    assert analytic_med(ScenarioSpec("duplicated", 7)) == 1.0
    assert analytic_med(ScenarioSpec("copy-average", 1000)) == pytest.approx(1 - 0.998 * LN2)
    assert analytic_med(ScenarioSpec("weighted-mix", 9)) == pytest.approx(1 - LN2)
    with pytest.raises(UnsupportedBase):
        analytic_med(ScenarioSpec("duplicated", 4), base="k")


def test_duplicated_mig_sap_zero_med_one():
    f, r = generate(ScenarioSpec("duplicated", 10, replication=50))
    assert med_score(r, f) == 1.0
    assert mig(r, f) == 0.0
    assert sap(r, f) == 0.0


def test_derivative_dci_matches_oracle():
    for kind in ("copy-average", "weighted-mix", "duplicated"):
        spec = ScenarioSpec(kind, 6)
        f, r = generate(spec)
        R = derivative_matrix(spec)
        got = dci_disentanglement(r, f, AnalyticDerivative(R))
        assert got == pytest.approx(dci_oracle(R.tolist()), abs=1e-12)


def test_simplified_dci_cases():
    # distinct averaged dimensions: each informative row is one-hot
    R = simplified_dci_importance(10, 4, 7)
    assert dci_oracle(R.tolist()) == pytest.approx(1.0, abs=1e-15)
    s = simplified_dci(10)
    assert s.cases["d0!=d1"][0] == 1.0
    # D = 3 has the single draw d0 = d1 = 2
    s3 = simplified_dci(3)
    assert list(s3.cases) == ["d0==d1"]
    assert s3.mean == pytest.approx(dci_oracle(simplified_dci_importance(3, 2, 2).tolist()), abs=1e-15)
    assert s3.mean == pytest.approx(1 - LN2 / 3, abs=1e-12)


@pytest.mark.parametrize("d", [3, 4, 5, 8, 12])
def test_simplified_dci_enumeration_brute_force(d):
    vals = [dci_oracle(simplified_dci_importance(d, a, b).tolist())
            for a, b in product(range(2, d), repeat=2)]
    assert simplified_dci(d).mean == pytest.approx(sum(vals) / len(vals), abs=1e-12)


def test_simplified_dci_sample_converges():
    e = simplified_dci(10)
    s = simplified_dci(10, mode="sample", seed=3, trials=10000)
    sigma = np.std(s.values) / math.sqrt(10000)
    assert abs(s.mean - e.mean) < 3 * sigma + 1e-15
    assert simplified_dci(10, seed=1).mean == simplified_dci(10, seed=2).mean


def test_closed_form_curve():
    assert dci_closed_form(1000) == pytest.approx(0.99930, abs=1e-5)
    assert float(Fraction(1)) - LN2 / 998 == dci_closed_form(1000)


def test_sweep_trends(tmp_path):
    rows = sweep("copy-average", [3, 10, 100, 1000])
    by = {}
    for _, d, m, v in rows:
        by.setdefault(m, []).append(v)
    assert all(b < a for a, b in zip(by["med"], by["med"][1:]))
    assert all(b > a for a, b in zip(by["dci_formula"], by["dci_formula"][1:]))
    assert all(b > a for a, b in zip(by["dci_closed_form"], by["dci_closed_form"][1:]))
    assert len(sweep("copy-average", [5], ["med"])) == 1
    write_sweep_csv(rows, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "kind,D,metric,value" and len(lines) == 13
    with pytest.raises(InputError):
        sweep("duplicated", [4], ["dci_formula"])
