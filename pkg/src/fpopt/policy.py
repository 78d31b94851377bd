"""Input-free Bernoulli policy: logits, log-likelihoods, REINFORCE, Adam.

The policy is a bare logit vector (a single layer taking no input); a
forward pass is an elementwise sigmoid giving per-bit transition
probabilities. Actions are whole bit patterns scored by the environment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

PROB_EPS = 1e-6
INIT_LOW = 0.49
INIT_HIGH = 0.51


@dataclass
class PolicyParams:
    """Trainable logits plus Adam state. Owned by a single driver thread."""

    theta: np.ndarray
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    def __post_init__(self) -> None:
        self.theta = np.asarray(self.theta, dtype=np.float64)
        self.m = np.asarray(self.m, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        if not (self.theta.shape == self.m.shape == self.v.shape):
            raise ValueError("theta, m, v must share one shape")
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("policy logits must be finite")

    @property
    def length(self) -> int:
        return int(self.theta.size)


@dataclass(frozen=True)
class ProbVector:
    """Sigmoid outputs clamped to [PROB_EPS, 1 - PROB_EPS]."""

    p: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        p = np.clip(np.asarray(self.p, dtype=np.float64), PROB_EPS, 1.0 - PROB_EPS)
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def length(self) -> int:
        return int(self.p.size)


@dataclass(frozen=True)
class ActionBatch:
    """Sampled target bit patterns with their rewards."""

    actions: np.ndarray  # (N, L) uint8
    rewards: np.ndarray  # (N,) float64

    def __post_init__(self) -> None:
        actions = np.asarray(self.actions, dtype=np.uint8)
        rewards = np.asarray(self.rewards, dtype=np.float64)
        if actions.ndim != 2 or actions.shape[0] < 1:
            raise ValueError("actions must be a non-empty (N, L) matrix")
        if rewards.shape != (actions.shape[0],):
            raise ValueError("rewards must be one scalar per action")
        if not np.all(np.isfinite(rewards)):
            raise ValueError("rewards must be finite")
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "rewards", rewards)

    @property
    def size(self) -> int:
        return int(self.actions.shape[0])


def init_policy(length: int, seed: int | np.random.Generator) -> PolicyParams:
    """Logits whose sigmoid outputs are i.i.d. uniform in (0.49, 0.51).

    The init range is read as output probabilities, so the starting policy is
    near maximum entropy; logits are the logit transform of that draw.
    """
    if length < 1:
        raise ValueError(f"policy length must be >= 1, got {length}")
    rng = np.random.default_rng(seed)
    u = rng.uniform(INIT_LOW, INIT_HIGH, size=length)
    theta = np.log(u / (1.0 - u))
    return PolicyParams(theta=theta, m=np.zeros(length), v=np.zeros(length), t=0)


def forward(params: PolicyParams) -> ProbVector:
    """p_i = clamp(sigmoid(theta_i))."""
    with np.errstate(over="ignore"):
        p = 1.0 / (1.0 + np.exp(-params.theta))
    return ProbVector(p)


def log_prob(probs: ProbVector, action: np.ndarray) -> float:
    """Factorized Bernoulli log-likelihood of a bit pattern."""
    a = np.asarray(action, dtype=np.float64).ravel()
    p = probs.p
    if a.size != p.size:
        raise ValueError(f"action length {a.size} != policy length {p.size}")
    return float(np.sum(a * np.log(p) + (1.0 - a) * np.log(1.0 - p)))


def reinforce_gradient(
    probs: ProbVector, batch: ActionBatch, baseline: bool = True
) -> np.ndarray:
    """Gradient over logits of the surrogate loss -(1/N) sum_j (R_j - b) log p(a_j).

    With the batch-mean baseline b (default on), equal rewards produce an
    exactly zero gradient. Descending this gradient ascends expected reward.
    """
    if batch.actions.shape[1] != probs.length:
        raise ValueError(
            f"action length {batch.actions.shape[1]} != policy length {probs.length}"
        )
    rewards = batch.rewards
    advantage = rewards - rewards.mean() if baseline else rewards
    residual = batch.actions.astype(np.float64) - probs.p[None, :]
    return -(advantage[:, None] * residual).mean(axis=0)


def adam_step(
    params: PolicyParams,
    grad: np.ndarray,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> PolicyParams:
    """Standard bias-corrected Adam descent step, updating params in place."""
    g = np.asarray(grad, dtype=np.float64)
    if g.shape != params.theta.shape:
        raise ValueError(f"gradient shape {g.shape} != theta shape {params.theta.shape}")
    if not np.all(np.isfinite(g)):
        raise ValueError("non-finite gradient")
    params.t += 1
    params.m = beta1 * params.m + (1.0 - beta1) * g
    params.v = beta2 * params.v + (1.0 - beta2) * g * g
    m_hat = params.m / (1.0 - beta1 ** params.t)
    v_hat = params.v / (1.0 - beta2 ** params.t)
    params.theta = params.theta - lr * m_hat / (np.sqrt(v_hat) + eps)
    if not np.all(np.isfinite(params.theta)):
        raise ValueError("policy logits became non-finite after update")
    return params


def policy_entropy(probs: ProbVector) -> float:
    """Mean per-bit Bernoulli entropy in nats."""
    p = probs.p
    return float(np.mean(-p * np.log(p) - (1.0 - p) * np.log(1.0 - p)))


_CHECKPOINT_HEADER = "fpopt-policy v1"


def save_policy(params: PolicyParams, path: str | Path) -> None:
    """Write a text checkpoint: versioned header, length, step, then arrays."""
    path = Path(path)
    lines = [_CHECKPOINT_HEADER, f"length {params.length}", f"t {params.t}"]
    for label, arr in (("theta", params.theta), ("m", params.m), ("v", params.v)):
        lines.append(label + " " + " ".join(repr(float(x)) for x in arr))
    path.write_text("\n".join(lines) + "\n")


def load_policy(path: str | Path) -> PolicyParams:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or lines[0] != _CHECKPOINT_HEADER:
        raise ValueError(f"{path}: not a policy checkpoint (header {lines[:1]!r})")
    length = int(lines[1].split()[1])
    t = int(lines[2].split()[1])
    arrays = {}
    for line in lines[3:6]:
        label, *values = line.split()
        arrays[label] = np.array([float(v) for v in values], dtype=np.float64)
    params = PolicyParams(theta=arrays["theta"], m=arrays["m"], v=arrays["v"], t=t)
    if params.length != length:
        raise ValueError(f"{path}: length header {length} != array length {params.length}")
    return params


