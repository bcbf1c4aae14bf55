"""Synthetic sparse precision matrices and Gaussian samples."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg

from .exceptions import DomainError, InputError
from .linalg import cholesky, is_positive_definite


@dataclass(frozen=True)
class StructureSpec:
    """Parameters of a ground-truth precision matrix.

    ``hubs``: consecutive groups of ``hub_group_size`` nodes, the first node of
    each group linked to the others with weight ``edge_value``.
    ``random``: each pair is an edge with probability ``edge_prob``, value
    uniform on ``value_range`` with a random sign; the diagonal is then set to
    ``diagonal_target`` plus the absolute row sum.
    """

    kind: str = "hubs"
    q: int = 100
    hub_group_size: int = 10
    edge_value: float = 0.25
    edge_prob: float = 0.01
    value_range: tuple = (0.2, 1.0)
    diagonal_target: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("hubs", "random"):
            raise InputError(f"unknown structure {self.kind!r}")
        if self.q < 2:
            raise InputError("q must be at least 2")
        if self.hub_group_size < 2:
            raise InputError("hub_group_size must be at least 2")
        if not 0 <= self.edge_prob < 1:
            raise InputError("edge_prob must lie in [0, 1)")
        lo, hi = self.value_range
        if not 0 <= lo <= hi:
            raise InputError("value_range must satisfy 0 <= low <= high")
        if not self.diagonal_target > 0:
            raise InputError("diagonal_target must be positive")

    def to_dict(self):
        d = asdict(self)
        d["value_range"] = list(self.value_range)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "value_range" in d:
            d["value_range"] = tuple(d["value_range"])
        return cls(**d)


def _hubs(spec):
    q = spec.q
    omega = np.eye(q) * spec.diagonal_target
    for start in range(0, q, spec.hub_group_size):
        members = np.arange(start, min(start + spec.hub_group_size, q))
        hub, leaves = members[0], members[1:]
        omega[hub, leaves] = spec.edge_value
        omega[leaves, hub] = spec.edge_value
    # a star with k leaves has spectrum d +/- |e| sqrt(k), d (multiplicity k-1)
    k = min(spec.hub_group_size, q) - 1
    if abs(spec.edge_value) * math.sqrt(k) >= spec.diagonal_target:
        raise DomainError(
            f"hubs matrix not PD: |edge_value| * sqrt({k}) = "
            f"{abs(spec.edge_value) * math.sqrt(k):.4g} >= diagonal {spec.diagonal_target}"
        )
    return omega


def _random(spec):
    q = spec.q
    rng = np.random.default_rng(spec.seed)
    iu = np.triu_indices(q, 1)
    m = iu[0].size
    # draw all three streams in full so supports are stable in edge_prob
    present = rng.random(m) < spec.edge_prob
    mags = rng.uniform(*spec.value_range, size=m)
    signs = np.where(rng.random(m) < 0.5, -1.0, 1.0)
    vals = np.where(present, mags * signs, 0.0)
    omega = np.zeros((q, q))
    omega[iu] = vals
    omega = omega + omega.T
    np.fill_diagonal(omega, spec.diagonal_target + np.abs(omega).sum(axis=1))
    return omega


def generate_precision(spec):
    """Ground-truth precision matrix for ``spec`` (always positive definite)."""
    omega = _hubs(spec) if spec.kind == "hubs" else _random(spec)
    if not is_positive_definite(omega):
        raise DomainError(f"{spec.kind} construction produced a non-PD matrix")
    return omega


def edge_count(omega):
    """Number ``s`` of non-zero off-diagonal entries (both triangles)."""
    omega = np.asarray(omega)
    return int(np.count_nonzero(omega) - np.count_nonzero(np.diag(omega)))


def sample_gaussian(omega0, n, seed):
    """Draw ``n`` rows from ``N(0, omega0^{-1})``.

    With ``omega0 = L L^T`` each row solves ``L^T x = z`` for standard
    normal ``z``, so ``cov(x) = (L L^T)^{-1}``.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    try:
        l = cholesky(omega0, "omega0")
    except DomainError as exc:
        raise InputError(str(exc)) from exc
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((l.shape[0], n))
    x = scipy.linalg.solve_triangular(l.T, z, lower=False)
    return np.ascontiguousarray(x.T)


def replicate_seed(seed, index):
    """Per-replicate seed: ``seed`` xor ``index``."""
    return int(seed) ^ int(index)
