import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from countmech import InputError, PipelineConfig, TwoStageCountPrivatizer, in_F, run_two_stage
from countmech.core import CountTable, PrivacyParam


@pytest.fixture(scope="module")
def counts():
    return np.random.default_rng(0).binomial(20, 0.5, 1000)


def test_fit_transform_matches_pipeline(counts):
    est = TwoStageCountPrivatizer(epsilon_total=1.0, n=21, seed=7)
    out = est.fit(counts).transform(counts)
    ref, report = run_two_stage(CountTable.from_counts(counts, 21), PipelineConfig(1.0, 21, seed=7))
    assert np.array_equal(out, ref.counts)
    assert np.allclose(est.z_, report.z)
    assert est.selector_ == "sandwich"
    assert in_F(est.transition_matrix_, est.z_, PrivacyParam.from_epsilon(est.epsilon_2_), tol=1e-9)


def test_column_input_and_params(counts):
    est = TwoStageCountPrivatizer(n=21, constructor="unfixed-optimum")
    out = est.fit_transform(counts.reshape(-1, 1))
    assert out.shape == counts.shape and est.n_features_in_ == 1
    assert clone(est).get_params()["constructor"] == "unfixed-optimum"


def test_baseline(counts):
    est = TwoStageCountPrivatizer(n=21, constructor="truncated-geometric").fit(counts)
    assert est.z_ is None and est.epsilon_2_ == 1.0


def test_not_fitted(counts):
    with pytest.raises(NotFittedError):
        TwoStageCountPrivatizer().transform(counts)


@pytest.mark.parametrize("X", [np.array([1.5, 2.0]), np.array([-1, 2]), np.zeros((2, 2)), np.array([])])
def test_bad_input(X):
    with pytest.raises(InputError):
        TwoStageCountPrivatizer(n=5).fit(X)


def test_default_split():
    assert TwoStageCountPrivatizer.default_split(1.0) == pytest.approx(0.1362, abs=5e-5)
