"""Simulators and brute-force oracles shared by the test modules.

Nothing here calls into the EM code paths it is used to check.
"""

import itertools
import math

import numpy as np

from emkit.ibd import SibPairObservation
from emkit.motif import ALPHABET

# ---------------------------------------------------------------- ABO


def abo_phenotype_loglik(p_A, p_B, counts):
    """Vectorized observed-data log-likelihood over arrays of (p_A, p_B)."""
    p_O = 1.0 - p_A - p_B
    probs = (p_A**2 + 2 * p_A * p_O, p_B**2 + 2 * p_B * p_O, 2 * p_A * p_B, p_O**2)
    total = np.zeros(np.broadcast(p_A, p_B).shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        for t, prob in zip(counts, probs):
            if t:
                total = total + t * np.log(prob)
    return np.where(np.isfinite(total), total, -np.inf)


def abo_grid_mle(counts, step=1e-3, final_step=1e-10):
    """Grid search over the triangle, then repeated local grid zooms."""
    grid = np.arange(0.0, 1.0 + step / 2, step)
    A, B = np.meshgrid(grid, grid, indexing="ij")
    mask = A + B <= 1.0 + 1e-12
    ll = np.where(mask, abo_phenotype_loglik(A, np.where(mask, B, 0.0), counts), -np.inf)
    i, j = np.unravel_index(np.argmax(ll), ll.shape)
    a, b = grid[i], grid[j]
    h = step
    offsets = np.linspace(-2.0, 2.0, 41)
    while h > final_step:
        da, db = np.meshgrid(a + offsets * h, b + offsets * h, indexing="ij")
        da = np.clip(da, 0.0, 1.0)
        db = np.clip(db, 0.0, 1.0)
        ok = da + db <= 1.0
        val = np.where(ok, abo_phenotype_loglik(da, np.where(ok, db, 0.0), counts), -np.inf)
        k = np.unravel_index(np.argmax(val), val.shape)
        a, b = da[k], db[k]
        h /= 10.0
    return np.array([a, b, 1.0 - a - b]), float(abo_phenotype_loglik(np.array(a), np.array(b), counts))


def random_abo_counts(rng, n_low=100, n_high=1000):
    freqs = rng.dirichlet([2.0, 2.0, 2.0])
    a, b, o = freqs
    probs = [a * a + 2 * a * o, b * b + 2 * b * o, 2 * a * b, o * o]
    n = int(rng.integers(n_low, n_high + 1))
    return tuple(int(x) for x in rng.multinomial(n, probs))


# ---------------------------------------------------------------- IBD


def raw_pattern_probability(obs):
    """Unconditional P(sib genotypes | parents) by listing all 16 transmissions."""
    want = (tuple(sorted(obs.sib1)), tuple(sorted(obs.sib2)))
    hits = 0
    for a1, a2, b1, b2 in itertools.product(range(2), repeat=4):
        g1 = tuple(sorted((obs.father[a1], obs.mother[b1])))
        g2 = tuple(sorted((obs.father[a2], obs.mother[b2])))
        hits += (g1, g2) == want
    return hits / 16


def simulate_sib_pairs(rng, n_pairs, n_alleles=10, ibd_probs=(0.25, 0.5, 0.25)):
    """Nuclear families with random parents and IBD drawn from ``ibd_probs``.

    Under the null (1/4, 1/2, 1/4) this is identical to independent Mendelian
    transmission.
    """
    freqs = np.full(n_alleles, 1.0 / n_alleles)
    pairs, truth = [], []
    for _ in range(n_pairs):
        father = tuple(int(x) for x in rng.choice(n_alleles, 2, p=freqs) + 1)
        mother = tuple(int(x) for x in rng.choice(n_alleles, 2, p=freqs) + 1)
        ibd = int(rng.choice(3, p=ibd_probs))
        f1, m1 = rng.integers(2, size=2)
        if ibd == 2:
            f2, m2 = f1, m1
        elif ibd == 0:
            f2, m2 = 1 - f1, 1 - m1
        elif rng.random() < 0.5:
            f2, m2 = f1, 1 - m1
        else:
            f2, m2 = 1 - f1, m1
        sib1 = (father[f1], mother[m1])
        sib2 = (father[f2], mother[m2])
        pairs.append(SibPairObservation(father, mother, sib1, sib2))
        truth.append(ibd)
    return pairs, np.array(truth)


def simplex_grid(step):
    n = int(round(1 / step))
    pts = [(i / n, j / n, (n - i - j) / n) for i in range(n + 1) for j in range(n + 1 - i)]
    return np.array(pts)


# ---------------------------------------------------------------- motif


def planted_motif_dataset(rng, n_seqs=20, length=100, width=8, signal=0.9):
    """Uniform background with one planted motif instance per sequence."""
    motif = rng.integers(4, size=width)
    seqs, starts = [], []
    for _ in range(n_seqs):
        s = rng.integers(4, size=length)
        k = int(rng.integers(length - width + 1))
        for p in range(width):
            if rng.random() < signal:
                s[k + p] = motif[p]
            else:
                s[k + p] = rng.choice([b for b in range(4) if b != motif[p]])
        seqs.append("".join(ALPHABET[c] for c in s))
        starts.append(k)
    return seqs, "".join(ALPHABET[c] for c in motif), starts


def shifted_matches(found, truth, max_shift=1):
    """Best positional agreement between two consensus strings over shifts."""
    best = 0
    for shift in range(-max_shift, max_shift + 1):
        hits = sum(
            found[p] == truth[p + shift] for p in range(len(found)) if 0 <= p + shift < len(truth)
        )
        best = max(best, hits)
    return best


def brute_start_posteriors(seq, theta, theta_bg):
    """Posterior over starts by multiplying letter probabilities directly."""
    width = theta.shape[1]
    idx = [ALPHABET.index(c) for c in seq]
    weights = []
    for k in range(len(seq) - width + 1):
        prob = 1.0
        for pos, b in enumerate(idx):
            if k <= pos < k + width:
                prob *= theta[b, pos - k]
            else:
                prob *= theta_bg[b]
        weights.append(prob)
    weights = np.array(weights)
    return weights / weights.sum(), math.log(weights.mean())


def random_sequences(rng, n, low, high):
    return ["".join(rng.choice(list(ALPHABET), size=int(rng.integers(low, high + 1)))) for _ in range(n)]


# ---------------------------------------------------------------- deconvolution


def smooth_truth(n_sizes=8):
    x = np.linspace(-1.5, 1.5, n_sizes)
    f = np.exp(-(x**2))
    return f / f.sum()


# ---------------------------------------------------------------- acceptance bookkeeping

ACCEPTANCE_RESULTS = {}
