"""EM estimators for incomplete multinomial data.

Four models share one engine (:func:`emkit.core.run_em`): ABO allele
frequencies, affected-sib-pair IBD sharing, one-occurrence-per-sequence motif
discovery and diffusion battery deconvolution.
"""

__version__ = "0.1.0"

from .core import EmConfig, EmResult, EmTrace, StopReason, assert_monotone, run_em  # noqa: E402
