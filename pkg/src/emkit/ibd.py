"""IBD sharing probabilities for affected sib pairs with typed parents.

Likelihood kernels come from enumerating the 16 equally likely ways two
parents can transmit one of their two allele copies to each of two children.
Copies are tracked by position, so homozygous parents still have two distinct
copies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import check_simplex
from .errors import ConstraintViolation, DegenerateInput, ImpossibleData, MendelianViolation

NULL_IBD = np.array([0.25, 0.5, 0.25])

# (father copy to sib1, mother copy to sib1, father copy to sib2, mother copy to sib2)
TRANSMISSIONS = tuple(itertools.product((0, 1), repeat=4))


def _genotype(a, b):
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class SibPairObservation:
    father: tuple
    mother: tuple
    sib1: tuple
    sib2: tuple

    def outcome_table(self):
        """Yield ``(ibd, sib1_genotype, sib2_genotype)`` for each transmission pattern."""
        f, m = self.father, self.mother
        for f1, m1, f2, m2 in TRANSMISSIONS:
            ibd = int(f1 == f2) + int(m1 == m2)
            yield ibd, _genotype(f[f1], m[m1]), _genotype(f[f2], m[m2])

    def is_compatible(self):
        s1, s2 = _genotype(*self.sib1), _genotype(*self.sib2)
        return any(g1 == s1 and g2 == s2 for _, g1, g2 in self.outcome_table())


def ibd_kernel(obs: SibPairObservation) -> np.ndarray:
    """L_j = P(sib genotypes | parents, IBD = j) for j = 0, 1, 2.

    IBD sharing 0 and 2 each cover 4 of the 16 patterns, sharing 1 covers 8.
    """
    s1, s2 = _genotype(*obs.sib1), _genotype(*obs.sib2)
    hits = [0, 0, 0]
    for ibd, g1, g2 in obs.outcome_table():
        if g1 == s1 and g2 == s2:
            hits[ibd] += 1
    if not any(hits):
        raise MendelianViolation(
            f"sibs {obs.sib1}, {obs.sib2} cannot be children of {obs.father} x {obs.mother}"
        )
    return np.array([hits[0] / 4, hits[1] / 8, hits[2] / 4])


def kernel_matrix(observations) -> np.ndarray:
    return np.array([ibd_kernel(obs) for obs in observations], dtype=float).reshape(-1, 3)


def is_uninformative(kernel) -> bool:
    return kernel[0] == kernel[1] == kernel[2]


def _mixture(pi, kernels):
    kernels = np.asarray(kernels, dtype=float)
    if kernels.ndim != 2 or kernels.shape[0] == 0:
        raise DegenerateInput("no sib pairs")
    return kernels * np.asarray(pi, dtype=float), kernels


def ibd_e_step(pi, kernels) -> np.ndarray:
    """Expected IBD counts (Z_0, Z_1, Z_2) summed over pairs via Bayes rule."""
    joint, _ = _mixture(pi, kernels)
    marginal = joint.sum(axis=1)
    bad = np.flatnonzero(marginal <= 0)
    if bad.size:
        raise ImpossibleData(f"sib pair {int(bad[0])} has zero probability under pi={list(pi)}")
    posterior = joint / marginal[:, None]
    return posterior.sum(axis=0)


def ibd_m_step(Z, n_pairs: int) -> np.ndarray:
    if n_pairs <= 0:
        raise DegenerateInput("n_pairs must be positive")
    return np.asarray(Z, dtype=float) / n_pairs


def ibd_log_likelihood(pi, kernels) -> float:
    """Sum over pairs of log(sum_j pi_j L_j); ``-inf`` if any pair is impossible."""
    joint, _ = _mixture(pi, kernels)
    marginal = joint.sum(axis=1)
    if np.any(marginal <= 0):
        return -math.inf
    return float(np.log(marginal).sum())


class IbdModel:
    """EM model contract; data is an ``(n_pairs, 3)`` kernel matrix."""

    def e_step(self, params, data):
        return ibd_e_step(params, data)

    def m_step(self, stats, data):
        return ibd_m_step(stats, data.shape[0])

    def log_likelihood(self, params, data):
        return ibd_log_likelihood(params, data)

    def validate(self, params, data):
        if len(params) != 3:
            raise ConstraintViolation("IBD probabilities need three entries")
        check_simplex(params, "IBD probabilities")
