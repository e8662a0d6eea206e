"""ABO allele frequency estimation by gene counting.

Blood types A and B are each a mixture of a homozygous and an O-carrier
genotype; AB and O identify the genotype. Under Hardy-Weinberg equilibrium the
E-step splits the A and B phenotype counts between the two compatible
genotypes, and the M-step counts alleles over ``2n`` chromosomes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import check_simplex
from .errors import ConstraintViolation, DegenerateInput, ImpossibleData


@dataclass(frozen=True)
class BloodTypeCounts:
    t_A: int
    t_B: int
    t_AB: int
    t_O: int

    def __post_init__(self):
        for name in ("t_A", "t_B", "t_AB", "t_O"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ConstraintViolation(f"{name} must be a non-negative integer, got {value!r}")
        if self.n < 1:
            raise DegenerateInput("blood type counts are all zero")

    @property
    def n(self) -> int:
        return self.t_A + self.t_B + self.t_AB + self.t_O

    def as_tuple(self):
        return (self.t_A, self.t_B, self.t_AB, self.t_O)


@dataclass(frozen=True)
class AlleleFrequencies:
    p_A: float
    p_B: float
    p_O: float

    def as_tuple(self):
        return (self.p_A, self.p_B, self.p_O)


UNIFORM_START = AlleleFrequencies(1 / 3, 1 / 3, 1 / 3)


@dataclass(frozen=True)
class ExpectedGenotypeCounts:
    g_AA: float
    g_AO: float
    g_BB: float
    g_BO: float
    g_AB: float
    g_OO: float


def phenotype_probabilities(freqs: AlleleFrequencies):
    """P(A), P(B), P(AB), P(O) under Hardy-Weinberg."""
    a, b, o = freqs.as_tuple()
    return (a * a + 2 * a * o, b * b + 2 * b * o, 2 * a * b, o * o)


def _split(count, p, p_o, label):
    if count == 0:
        return 0.0, 0.0
    if p <= 0:
        raise ImpossibleData(f"{count} subjects of type {label} but p_{label} = 0")
    homo = p * p
    het = 2 * p * p_o
    denom = homo + het
    return count * homo / denom, count * het / denom


def abo_e_step(freqs: AlleleFrequencies, counts: BloodTypeCounts) -> ExpectedGenotypeCounts:
    g_AA, g_AO = _split(counts.t_A, freqs.p_A, freqs.p_O, "A")
    g_BB, g_BO = _split(counts.t_B, freqs.p_B, freqs.p_O, "B")
    return ExpectedGenotypeCounts(
        g_AA=g_AA, g_AO=g_AO, g_BB=g_BB, g_BO=g_BO, g_AB=float(counts.t_AB), g_OO=float(counts.t_O)
    )


def abo_m_step(g: ExpectedGenotypeCounts, n: int) -> AlleleFrequencies:
    """Allele counting: each subject contributes two alleles."""
    if n <= 0:
        raise DegenerateInput("n must be positive")
    two_n = 2.0 * n
    return AlleleFrequencies(
        p_A=(2 * g.g_AA + g.g_AO + g.g_AB) / two_n,
        p_B=(2 * g.g_BB + g.g_BO + g.g_AB) / two_n,
        p_O=(2 * g.g_OO + g.g_AO + g.g_BO) / two_n,
    )


def abo_log_likelihood(freqs: AlleleFrequencies, counts: BloodTypeCounts) -> float:
    """Multinomial log-likelihood of the phenotype counts (no multinomial coefficient).

    Returns ``-inf`` when a phenotype with positive count has probability zero.
    """
    total = 0.0
    for t, prob in zip(counts.as_tuple(), phenotype_probabilities(freqs)):
        if t == 0:
            continue
        if prob <= 0:
            return -math.inf
        total += t * math.log(prob)
    return total


class AboModel:
    """EM model contract for :func:`emkit.core.run_em`; data is a BloodTypeCounts."""

    def e_step(self, params, data):
        return abo_e_step(params, data)

    def m_step(self, stats, data):
        return abo_m_step(stats, data.n)

    def log_likelihood(self, params, data):
        return abo_log_likelihood(params, data)

    def validate(self, params, data):
        check_simplex(params.as_tuple(), "allele frequencies")


def absorbed_alleles(freqs: AlleleFrequencies, counts: BloodTypeCounts):
    """Alleles stuck at frequency zero although no phenotype count forced it.

    A zero frequency is absorbing under the M-step, so it is reported rather
    than repaired.
    """
    flags = []
    if freqs.p_A == 0 and counts.t_A == 0 and counts.t_AB == 0:
        flags.append("A")
    if freqs.p_B == 0 and counts.t_B == 0 and counts.t_AB == 0:
        flags.append("B")
    if freqs.p_O == 0 and counts.t_O == 0:
        flags.append("O")
    return flags
