import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghslla.exceptions import DomainError, InputError
from ghslla.metrics import (
    EvaluationReport,
    confusion_counts,
    evaluate,
    frobenius_error,
    rates_from_counts,
    steins_loss,
    support_metrics,
)


def random_pd(q, rng):
    a = rng.standard_normal((q, q))
    return a @ a.T / q + 0.5 * np.eye(q)


def test_steins_examples():
    assert steins_loss(np.eye(3), np.eye(3)) == pytest.approx(0.0, abs=1e-14)
    assert steins_loss(2 * np.eye(2), np.eye(2)) == pytest.approx(4 - 2 * math.log(2) - 2, abs=1e-14)
    with pytest.raises(DomainError):
        steins_loss(-np.eye(2), np.eye(2))


def test_steins_dense_oracle():
    rng = np.random.default_rng(0)
    a, b = random_pd(6, rng), random_pd(6, rng)
    m = a @ np.linalg.inv(b)
    ref = np.trace(m) - np.linalg.slogdet(m)[1] - 6
    assert steins_loss(a, b) == pytest.approx(ref, rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**31 - 1))
def test_steins_nonnegative_and_congruence_invariant(q, seed):
    rng = np.random.default_rng(seed)
    a, b = random_pd(q, rng), random_pd(q, rng)
    loss = steins_loss(a, b)
    assert loss >= -1e-10
    t = rng.standard_normal((q, q)) + 3 * np.eye(q)
    moved = steins_loss(t @ a @ t.T, t @ b @ t.T)
    assert moved == pytest.approx(loss, rel=1e-8, abs=1e-8)


def test_frobenius_examples():
    t = np.eye(3)
    assert frobenius_error(t, t) == 0.0
    e = t.copy()
    e[0, 1] = e[1, 0] = 0.3
    assert frobenius_error(e, t) == pytest.approx(math.sqrt(2 * 0.09))
    assert frobenius_error(2 * np.eye(2), 4 * np.eye(2), against_covariance=True) == pytest.approx(
        math.sqrt(2) * 1.75
    )
    with pytest.raises(InputError):
        frobenius_error(np.eye(2), np.eye(3))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_frobenius_properties(q, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.standard_normal((q, q)) for _ in range(3))
    assert frobenius_error(a, c) <= frobenius_error(a, b) + frobenius_error(b, c) + 1e-12
    d = a - b
    eig = np.linalg.eigvalsh(d.T @ d)
    assert frobenius_error(a, b) == pytest.approx(math.sqrt(max(eig.sum(), 0)), rel=1e-9)


def test_support_examples():
    truth = np.eye(4)
    truth[0, 1] = truth[1, 0] = 0.3
    assert support_metrics(truth, truth) == (1.0, 0.0, 1.0)
    # three of six pairs are edges; a dense estimate finds all of them and all non-edges
    truth = np.eye(4)
    for i, j in [(0, 1), (0, 2), (0, 3)]:
        truth[i, j] = truth[j, i] = 0.2
    tpr, fpr, mcc = support_metrics(np.ones((4, 4)), truth)
    assert (tpr, fpr, mcc) == (1.0, 1.0, 0.0)


def test_confusion_example():
    tpr, fpr, mcc = rates_from_counts(tp=9, fp=3, tn=87, fn=1)
    assert tpr == 0.9
    assert fpr == pytest.approx(3 / 90)
    assert mcc == pytest.approx((9 * 87 - 3) / math.sqrt(12 * 10 * 90 * 88), rel=1e-14)
    assert mcc == pytest.approx(0.8000946913656628, rel=1e-12)


def test_no_true_edges():
    tpr, fpr, mcc = support_metrics(np.eye(3), np.eye(3))
    assert math.isnan(tpr) and fpr == 0.0 and mcc == 0.0


def test_zero_tol():
    truth = np.eye(3)
    truth[0, 1] = truth[1, 0] = 0.5
    est = np.eye(3)
    est[0, 1] = est[1, 0] = 1e-9
    assert confusion_counts(est, truth) == (1, 0, 2, 0)
    assert confusion_counts(est, truth, zero_tol=1e-6) == (0, 0, 2, 1)
    with pytest.raises(InputError):
        support_metrics(est, truth, zero_tol=-1)


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 10), st.integers(0, 2**31 - 1))
def test_support_permutation_invariant(q, seed):
    rng = np.random.default_rng(seed)
    def sparse_sym():
        m = rng.standard_normal((q, q)) * (rng.random((q, q)) < 0.4)
        return m + m.T + np.eye(q)
    est, truth = sparse_sym(), sparse_sym()
    p = np.eye(q)[rng.permutation(q)]
    a = support_metrics(est, truth)
    b = support_metrics(p @ est @ p.T, p @ truth @ p.T)
    np.testing.assert_equal(a, b)


def test_report_serialisation():
    truth = np.eye(3)
    truth[0, 2] = truth[2, 0] = 0.3
    rep = evaluate(np.eye(3), truth, wall_time=1.5)
    assert isinstance(rep, EvaluationReport)
    d = json.loads(rep.to_json())
    assert d["tpr"] == 0.0 and d["wall_time"] == 1.5
    assert len(rep.csv_row()) == len(EvaluationReport.csv_header())
    nan_rep = evaluate(np.eye(3), np.eye(3))
    assert nan_rep.to_dict()["tpr"] is None
    forced = evaluate(np.eye(3), truth, support=np.ones((3, 3)))
    assert forced.tpr == 1.0
