"""Estimation and support-recovery metrics against a known truth."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg

from .exceptions import InputError
from .linalg import cholesky


@dataclass
class EvaluationReport:
    steins_loss: float
    frobenius_error: float
    tpr: float
    fpr: float
    mcc: float
    wall_time: float = float("nan")

    def to_dict(self):
        return {k: (None if isinstance(v, float) and math.isnan(v) else v)
                for k, v in asdict(self).items()}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self):
        return [repr(float(v)) for v in asdict(self).values()]

    @staticmethod
    def csv_header():
        return ["steins_loss", "frobenius_error", "tpr", "fpr", "mcc", "wall_time"]


def _same_shape(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def steins_loss(est, truth):
    """``tr(est truth^{-1}) - log det(est truth^{-1}) - q``.

    Uses the Cholesky factor of ``truth`` only; no inverse is formed.
    """
    est, truth = _same_shape(est, truth)
    l_t = cholesky(truth, "truth")
    l_e = cholesky(est, "estimate")
    # tr(est truth^{-1}) = ||L_t^{-1} L_e||_F^2
    m = scipy.linalg.solve_triangular(l_t, l_e, lower=True)
    tr = float(np.sum(m * m))
    logdet = 2.0 * float(np.sum(np.log(np.diag(l_e))) - np.sum(np.log(np.diag(l_t))))
    return tr - logdet - est.shape[0]


def frobenius_error(est, truth, against_covariance=False):
    """``||est - truth||_F``.

    With ``against_covariance=True`` the reference is ``truth^{-1}`` instead,
    the literal reading of one published definition of the "F norm" column.
    """
    est, truth = _same_shape(est, truth)
    ref = np.linalg.inv(truth) if against_covariance else truth
    return float(np.sqrt(np.sum((est - ref) ** 2)))


def confusion_counts(est, truth, zero_tol=0.0):
    est, truth = _same_shape(est, truth)
    iu = np.triu_indices(est.shape[0], 1)
    pred = np.abs(est[iu]) > zero_tol
    real = truth[iu] != 0
    tp = int(np.sum(pred & real))
    fp = int(np.sum(pred & ~real))
    tn = int(np.sum(~pred & ~real))
    fn = int(np.sum(~pred & real))
    return tp, fp, tn, fn


def rates_from_counts(tp, fp, tn, fn):
    """TPR, FPR and MCC from a confusion matrix.

    A truth without edges leaves TPR undefined (NaN); a zero factor in the
    MCC denominator gives MCC = 0.
    """
    tpr = tp / (tp + fn) if tp + fn else float("nan")
    fpr = fp / (fp + tn) if fp + tn else float("nan")
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = (tp * tn - fp * fn) / math.sqrt(denom) if denom else 0.0
    return tpr, fpr, mcc


def support_metrics(est, truth, zero_tol=0.0):
    """(TPR, FPR, MCC) over the strict upper triangle.

    An entry of ``est`` counts as an edge when ``|est_ij| > zero_tol``.
    """
    if zero_tol < 0:
        raise InputError("zero_tol must be non-negative")
    return rates_from_counts(*confusion_counts(est, truth, zero_tol))


def evaluate(est, truth, support=None, wall_time=float("nan"), zero_tol=0.0):
    """Full :class:`EvaluationReport`; ``support`` overrides the pattern of ``est``."""
    pattern = est if support is None else np.asarray(support, dtype=float)
    tpr, fpr, mcc = support_metrics(pattern, truth, zero_tol)
    return EvaluationReport(
        steins_loss=steins_loss(est, truth),
        frobenius_error=frobenius_error(est, truth),
        tpr=tpr,
        fpr=fpr,
        mcc=mcc,
        wall_time=wall_time,
    )
