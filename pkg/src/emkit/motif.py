"""Motif discovery with exactly one motif occurrence per sequence.

Each sequence holds one width-``W`` motif at an unknown start, every start
being equally likely a priori. Motif letters follow a position-specific
``4 x W`` probability matrix; all other letters follow a single background
distribution. All start windows of all sequences are stacked into one array
so E- and M-steps are vectorized across the dataset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import EmConfig, check_simplex, run_em
from .errors import ConstraintViolation, DegenerateInput, ImpossibleData

ALPHABET = "ACGT"
_CODE = {c: i for i, c in enumerate(ALPHABET)}


class MotifDataset:
    """Sequences over ACGT plus the motif width, with precomputed windows."""

    def __init__(self, sequences, width=8):
        sequences = [s.strip().upper() for s in sequences]
        if not sequences:
            raise DegenerateInput("no sequences")
        if int(width) != width or width < 1:
            raise ConstraintViolation(f"width must be a positive integer, got {width!r}")
        width = int(width)
        for i, s in enumerate(sequences):
            bad = set(s) - set(ALPHABET)
            if bad:
                raise ConstraintViolation(f"sequence {i} contains letters outside ACGT: {sorted(bad)}")
            if len(s) < width:
                raise ConstraintViolation(f"sequence {i} has length {len(s)} < width {width}")
        self.sequences = sequences
        self.width = width
        self.codes = [np.fromiter((_CODE[c] for c in s), dtype=np.intp, count=len(s)) for s in sequences]

        self.n_starts = np.array([len(s) - width + 1 for s in sequences], dtype=np.intp)
        self.offsets = np.concatenate([[0], np.cumsum(self.n_starts)[:-1]]).astype(np.intp)
        self.seq_index = np.repeat(np.arange(len(sequences)), self.n_starts)
        self.windows = np.concatenate(
            [np.lib.stride_tricks.sliding_window_view(c, width) for c in self.codes]
        )
        self.window_counts = _letter_counts(self.windows)
        self.seq_counts = np.array([np.bincount(c, minlength=4) for c in self.codes])
        # letters outside each candidate window
        self.outside_counts = self.seq_counts[self.seq_index] - self.window_counts

    def __len__(self):
        return len(self.sequences)


def _letter_counts(windows):
    counts = np.zeros((windows.shape[0], 4), dtype=np.intp)
    for b in range(4):
        counts[:, b] = (windows == b).sum(axis=1)
    return counts


def _safe_log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


@dataclass
class MotifModel:
    theta: np.ndarray  # 4 x W, column p = letter distribution at motif position p
    theta_bg: np.ndarray
    pseudocount: float = 0.1

    @property
    def width(self):
        return self.theta.shape[1]


@dataclass
class StartPosteriors:
    """Flat posterior over all candidate starts; ``offsets`` delimit sequences."""

    z: np.ndarray
    offsets: np.ndarray
    log_marginal: np.ndarray = field(repr=False, default=None)

    def per_sequence(self):
        return np.split(self.z, self.offsets[1:])


def _window_scores(model: MotifModel, data: MotifDataset):
    if model.theta.shape != (4, data.width):
        raise ConstraintViolation(f"theta has shape {model.theta.shape}, expected (4, {data.width})")
    log_theta = _safe_log(model.theta)
    log_bg = _safe_log(model.theta_bg)
    motif = log_theta[data.windows, np.arange(data.width)].sum(axis=1)
    outside = np.where(data.outside_counts > 0, data.outside_counts * log_bg, 0.0).sum(axis=1)
    return motif + outside


def _segment_logsumexp(scores, data):
    top = np.maximum.reduceat(scores, data.offsets)
    dead = ~np.isfinite(top)
    shift = np.where(dead, 0.0, top)
    shifted = np.exp(scores - shift[data.seq_index])
    sums = np.add.reduceat(shifted, data.offsets)
    with np.errstate(divide="ignore"):
        return shift + np.log(sums), shifted, sums, dead


def motif_e_step(model: MotifModel, data: MotifDataset) -> StartPosteriors:
    scores = _window_scores(model, data)
    log_marg, shifted, sums, dead = _segment_logsumexp(scores, data)
    if dead.any():
        raise ImpossibleData(f"sequence {int(np.flatnonzero(dead)[0])} has zero probability at every start")
    z = shifted / sums[data.seq_index]
    return StartPosteriors(z=z, offsets=data.offsets, log_marginal=log_marg)


def expected_counts(z, data: MotifDataset):
    """Expected motif letter counts (4 x W) and expected background letter counts."""
    counts = np.empty((4, data.width))
    for p in range(data.width):
        counts[:, p] = np.bincount(data.windows[:, p], weights=z, minlength=4)
    bg = data.seq_counts.sum(axis=0) - counts.sum(axis=1)
    return counts, np.maximum(bg, 0.0)


def motif_m_step(z: StartPosteriors, data: MotifDataset, pseudocount: float = 0.1) -> MotifModel:
    if pseudocount < 0:
        raise ConstraintViolation("pseudocount must be non-negative")
    flat = z.z if isinstance(z, StartPosteriors) else np.asarray(z, dtype=float)
    if flat.shape != (data.windows.shape[0],):
        raise ConstraintViolation("posterior vector does not match dataset windows")
    counts, bg = expected_counts(flat, data)
    counts = counts + pseudocount
    bg = bg + pseudocount
    bg_total = bg.sum()
    if bg_total > 0:
        theta_bg = bg / bg_total
    else:
        # every letter is inside the motif window
        theta_bg = np.full(4, 0.25)
    return MotifModel(theta=counts / counts.sum(axis=0), theta_bg=theta_bg, pseudocount=pseudocount)


def motif_log_likelihood(model: MotifModel, data: MotifDataset) -> float:
    """Observed-data log-likelihood, averaging over starts with a uniform prior."""
    log_marg, _, _, _ = _segment_logsumexp(_window_scores(model, data), data)
    return float((log_marg - np.log(data.n_starts)).sum())


def log_prior(model: MotifModel) -> float:
    """Dirichlet log-prior (up to a constant) matching the pseudocount M-step."""
    lam = model.pseudocount
    if lam == 0:
        return 0.0
    return float(lam * (_safe_log(model.theta).sum() + _safe_log(model.theta_bg).sum()))


def consensus(model: MotifModel) -> str:
    """Most probable letter per position; ties go to the earlier letter of ACGT."""
    return "".join(ALPHABET[i] for i in np.argmax(model.theta, axis=0))


class MotifModelEM:
    """EM model contract; data is a MotifDataset.

    With a positive pseudocount the M-step is a MAP update, so the tracked
    objective is the log-likelihood plus the matching Dirichlet log-prior,
    which is what EM increases monotonically.
    """

    def __init__(self, pseudocount=0.1):
        if pseudocount < 0:
            raise ConstraintViolation("pseudocount must be non-negative")
        self.pseudocount = pseudocount

    def e_step(self, params, data):
        return motif_e_step(params, data)

    def m_step(self, stats, data):
        return motif_m_step(stats, data, self.pseudocount)

    def log_likelihood(self, params, data):
        return motif_log_likelihood(params, data) + log_prior(params)

    def validate(self, params, data):
        if params.theta.shape != (4, data.width):
            raise ConstraintViolation(f"theta has shape {params.theta.shape}, expected (4, {data.width})")
        for p in range(data.width):
            check_simplex(params.theta[:, p], f"theta column {p}")
        check_simplex(params.theta_bg, "theta_bg")


def random_start(data: MotifDataset, rng, pseudocount=0.1, weight=0.7) -> MotifModel:
    """Seed theta from one randomly chosen window: ``weight`` on the observed letter."""
    i = int(rng.integers(len(data)))
    k = int(rng.integers(data.n_starts[i]))
    window = data.codes[i][k : k + data.width]
    theta = np.full((4, data.width), (1.0 - weight) / 3)
    theta[window, np.arange(data.width)] = weight
    bg = data.seq_counts.sum(axis=0) + max(pseudocount, 1e-3)
    return MotifModel(theta=theta, theta_bg=bg / bg.sum(), pseudocount=pseudocount)


@dataclass
class RestartOutcome:
    index: int
    loglik: float
    iterations: int
    converged: bool
    consensus: str
    result: object = field(repr=False)


@dataclass
class MotifFit:
    model: MotifModel
    loglik: float
    best_restart: int
    restarts: list
    posteriors: StartPosteriors

    @property
    def result(self):
        return self.restarts[self.best_restart].result

    def best_starts(self):
        """Per sequence: 0-based maximum-posterior start and its posterior probability."""
        out = []
        for zi in self.posteriors.per_sequence():
            k = int(np.argmax(zi))
            out.append((k, float(zi[k])))
        return out


def discover_motif(data: MotifDataset, pseudocount=0.1, restarts=10, seed=0, config=None) -> MotifFit:
    """Run EM from ``restarts`` random window seeds and keep the best fit.

    Best means highest final observed-data log-likelihood; ties go to the lowest
    restart index.
    """
    if restarts < 1:
        raise ConstraintViolation("restarts must be positive")
    rng = np.random.default_rng(seed)
    em = MotifModelEM(pseudocount)
    outcomes = []
    for r in range(restarts):
        init = random_start(data, rng, pseudocount)
        res = run_em(em, data, init, config or EmConfig())
        ll = motif_log_likelihood(res.final_params, data)
        outcomes.append(
            RestartOutcome(r, ll, res.n_iterations, res.trace.converged, consensus(res.final_params), res)
        )
    best = max(outcomes, key=lambda o: (o.loglik, -o.index))
    model = best.result.final_params
    return MotifFit(
        model=model,
        loglik=best.loglik,
        best_restart=best.index,
        restarts=outcomes,
        posteriors=motif_e_step(model, data),
    )
