"""fpopt: budget-constrained black-box optimization over binary fingerprints.

A policy-guided bit-flip search (Metropolis-Hastings proposals from a
trainable Bernoulli policy, GA local refinement, REINFORCE updates), an
elitist GA baseline, a random-search control, synthetic oracle landscapes, a
wire protocol for external oracle processes, and sample-efficiency metrics
with a multi-seed experiment harness.
"""

__version__ = "0.1.0"

from .fingerprint import (
    Fingerprint,
    cosine_similarity,
    diversity,
    hamming_distance,
    random_fingerprint,
    tanimoto_similarity,
)
from .oracle import BudgetedOracle, BudgetExhausted, EvalTrace, Oracle
from .metrics import Candidate, RunResult

__all__ = [
    "__version__",
    "Fingerprint",
    "cosine_similarity",
    "tanimoto_similarity",
    "hamming_distance",
    "diversity",
    "random_fingerprint",
    "Oracle",
    "BudgetedOracle",
    "BudgetExhausted",
    "EvalTrace",
    "Candidate",
    "RunResult",
]
