"""Search drivers over budgeted oracles.

Three algorithms share the oracle/trace machinery:

* a baseline elitist GA (uniform crossover, fixed-size bit-flip mutation),
* the policy-driven loop: Metropolis-Hastings proposals weighted by the
  policy's transition probabilities, each proposal refined by a short GA
  local search whose best discovery is the proposal's reward, REINFORCE
  update of the policy, MH acceptance of the best-rewarded proposal,
* a uniform random-search control.

Budget exhaustion is a control signal, not a failure: drivers catch it and
finalize from the trace, so purchased evaluations are never discarded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .fingerprint import Fingerprint, random_fingerprint
from .metrics import Candidate, RunResult, run_result_from_trace
from .oracle import BudgetedOracle, BudgetExhausted
from .policy import (
    ActionBatch,
    ProbVector,
    adam_step,
    forward,
    init_policy,
    policy_entropy,
    reinforce_gradient,
)

# Runs on enumerably small spaces can stop consuming budget entirely (every
# candidate is a cache hit). These guards end such runs instead of spinning.
_STALL_GENERATIONS = 500
_STALL_RANDOM_DRAWS = 10_000


class Population:
    """Elite set of distinct-fingerprint candidates, sorted by descending score.

    Merging deduplicates by fingerprint (first occurrence wins) and truncates
    to the configured size, so the best member never regresses.
    """

    def __init__(self, members: Iterable[Candidate], size: int):
        if size < 1:
            raise ValueError(f"population size must be >= 1, got {size}")
        self.size = size
        self.members: list[Candidate] = []
        self.merge(members)
        if not self.members:
            raise ValueError("population cannot start empty")

    def merge(self, candidates: Iterable[Candidate]) -> None:
        seen = {c.fp for c in self.members}
        pool = list(self.members)
        for cand in candidates:
            if cand.fp not in seen:
                seen.add(cand.fp)
                pool.append(cand)
        pool.sort(key=lambda c: -c.score)  # stable: incumbents win ties
        self.members = pool[: self.size]

    @property
    def best(self) -> Candidate:
        return self.members[0]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


@dataclass
class GAConfig:
    """Knobs for one GA regime (baseline run or local search)."""

    population_size: int = 16
    offspring_size: int = 64
    mutation_prob: float = 0.5
    flips_per_mutation: int = 24
    n_iterations: int = 6  # used only as a local-search loop bound

    def validate(self, fp_length: int | None = None) -> None:
        if min(self.population_size, self.offspring_size, self.n_iterations) < 1:
            raise ValueError("population_size, offspring_size, n_iterations must be >= 1")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError(f"mutation_prob must be in [0, 1], got {self.mutation_prob}")
        if self.flips_per_mutation < 1:
            raise ValueError("flips_per_mutation must be >= 1")
        if fp_length is not None and self.flips_per_mutation > fp_length:
            raise ValueError(
                f"flips_per_mutation {self.flips_per_mutation} exceeds fingerprint length {fp_length}"
            )


@dataclass
class DReinforceConfig:
    population_size: int = 16
    n_repeats: int = 8
    mh_flip_count: int = 16
    mh_beta: float = 10.0
    learning_rate: float = 1e-3
    use_baseline: bool = True
    max_outer_iterations: int | None = None
    ga_local: GAConfig = field(
        default_factory=lambda: GAConfig(
            population_size=16,
            offspring_size=256,
            mutation_prob=0.5,
            flips_per_mutation=24,
            n_iterations=6,
        )
    )

    def validate(self, fp_length: int | None = None) -> None:
        if self.population_size < 1 or self.n_repeats < 1:
            raise ValueError("population_size and n_repeats must be >= 1")
        if self.mh_flip_count < 1:
            raise ValueError("mh_flip_count must be >= 1")
        if fp_length is not None and self.mh_flip_count > fp_length:
            raise ValueError(
                f"mh_flip_count {self.mh_flip_count} exceeds fingerprint length {fp_length}"
            )
        if self.mh_beta < 0:
            raise ValueError("mh_beta must be >= 0")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        self.ga_local.validate(fp_length)


def init_population(
    pool: Sequence[Fingerprint],
    size: int,
    oracle: BudgetedOracle,
    rng: np.random.Generator,
) -> Population:
    """Sample ``size`` distinct pool entries uniformly and score them."""
    if len(pool) < size:
        raise ValueError(f"seed pool has {len(pool)} entries, need >= {size}")
    picks = rng.choice(len(pool), size=size, replace=False)
    members = [Candidate(pool[i], oracle.evaluate(pool[i])) for i in picks]
    return Population(members, size)


def mh_propose(
    current: Fingerprint, probs: ProbVector, k: int, rng: np.random.Generator
) -> Fingerprint:
    """Flip exactly k distinct positions, biased toward the policy's preference.

    Position weights are p_i for 0-bits and 1 - p_i for 1-bits, so a flip
    always moves a bit toward the value the policy favors.
    """
    length = current.length
    if not 1 <= k <= length:
        raise ValueError(f"flip count must be in [1, {length}], got {k}")
    if probs.length != length:
        raise ValueError(f"probability length {probs.length} != fingerprint length {length}")
    bits = current.bits
    weights = np.where(bits == 0, probs.p, 1.0 - probs.p)
    total = weights.sum()
    if total <= 0.0:  # unreachable under clamping; keep the run alive anyway
        positions = rng.choice(length, size=k, replace=False)
    else:
        positions = rng.choice(length, size=k, replace=False, p=weights / total)
    return current.flip(positions)


def mh_accept(
    score_current: float, score_proposal: float, beta: float, rng: np.random.Generator
) -> bool:
    """Accept with probability min(1, exp(beta * (proposal - current)))."""
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    prob = min(1.0, float(np.exp(beta * (score_proposal - score_current))))
    return rng.random() < prob


def ga_crossover(a: Fingerprint, b: Fingerprint, rng: np.random.Generator) -> Fingerprint:
    """Uniform crossover: each position takes a's or b's bit with probability 1/2."""
    if a.length != b.length:
        raise ValueError(f"parent length mismatch: {a.length} != {b.length}")
    mask = rng.integers(0, 2, size=a.length, dtype=np.uint8)
    return Fingerprint(np.where(mask == 1, a.bits, b.bits))


def ga_mutate(fp: Fingerprint, flips: int, rng: np.random.Generator) -> Fingerprint:
    """Flip exactly ``flips`` distinct uniformly chosen positions."""
    if not 0 < flips <= fp.length:
        raise ValueError(f"flips must be in (0, {fp.length}], got {flips}")
    return fp.flip(rng.choice(fp.length, size=flips, replace=False))


def ga_generation(
    pop: Population,
    cfg: GAConfig,
    oracle: BudgetedOracle,
    rng: np.random.Generator,
    collect: list[Candidate] | None = None,
) -> Population:
    """One elitist generation, updating ``pop`` in place.

    Parents are drawn uniformly with replacement; crossover always applies,
    mutation with probability ``mutation_prob``. Children are scored through
    the budgeted oracle (repeats are free); survivors are the top
    ``population_size`` of parents plus scored children. If the budget runs
    out mid-batch, the children scored so far are merged before the
    BudgetExhausted signal propagates. ``collect``, when given, receives
    every scored child (cache hits included).
    """
    members = pop.members
    scored: list[Candidate] = []
    try:
        for _ in range(cfg.offspring_size):
            pa = members[rng.integers(0, len(members))]
            pb = members[rng.integers(0, len(members))]
            child = ga_crossover(pa.fp, pb.fp, rng)
            if rng.random() < cfg.mutation_prob:
                child = ga_mutate(child, cfg.flips_per_mutation, rng)
            cand = Candidate(child, oracle.evaluate(child))
            scored.append(cand)
            if collect is not None:
                collect.append(cand)
    except BudgetExhausted:
        pop.merge(scored)
        raise
    pop.merge(scored)
    return pop


def _finalize(
    oracle: BudgetedOracle, diversity_sim: str, extras: dict | None = None
) -> RunResult:
    return run_result_from_trace(
        oracle.trace, oracle.budget, diversity_sim=diversity_sim, extras=extras
    )


def run_ga_baseline(
    cfg: GAConfig,
    oracle: BudgetedOracle,
    pool: Sequence[Fingerprint],
    rng: np.random.Generator,
    diversity_sim: str = "tanimoto",
) -> RunResult:
    """Elitist GA from a seeded population until the budget is exhausted."""
    cfg.validate(oracle.fp_length)
    try:
        pop = init_population(pool, cfg.population_size, oracle, rng)
        stalled = 0
        while stalled < _STALL_GENERATIONS:
            before = len(oracle.trace)
            ga_generation(pop, cfg, oracle, rng)
            stalled = stalled + 1 if len(oracle.trace) == before else 0
    except BudgetExhausted:
        pass
    return _finalize(oracle, diversity_sim)


def _local_search(
    proposal: Candidate,
    elites: Population,
    cfg: GAConfig,
    oracle: BudgetedOracle,
    rng: np.random.Generator,
) -> float:
    """Short GA from the proposal plus the current elites.

    Returns the best score discovered by this rollout (the proposal or any
    child it scored). The elite set is refreshed with every discovery, so
    later rollouts build on everything scored so far even when the budget
    ends inside the first outer iteration.
    """
    scratch = Population(
        [proposal] + elites.members[: cfg.population_size - 1], cfg.population_size
    )
    best = proposal.score
    children: list[Candidate] = []
    try:
        for _ in range(cfg.n_iterations):
            ga_generation(scratch, cfg, oracle, rng, collect=children)
    finally:
        for cand in children:
            if cand.score > best:
                best = cand.score
        elites.merge([proposal] + children)
    return best


def run_dreinforce(
    cfg: DReinforceConfig,
    oracle: BudgetedOracle,
    pool: Sequence[Fingerprint],
    rng: np.random.Generator,
    diversity_sim: str = "tanimoto",
) -> RunResult:
    """Policy-guided search: MH proposals, GA refinement, REINFORCE updates.

    Per outer iteration and member: draw ``n_repeats`` proposals from the
    policy, refine each with the local GA, reward each rollout by its best
    discovery, update the policy once with the member-averaged REINFORCE
    gradient, and move the member to its best-rewarded proposal when the MH
    rule accepts. The elite set is refreshed from everything scored.

    The returned RunResult carries extras["policy_entropy"], the mean per-bit
    entropy at the start of every outer iteration plus a final value after
    the last update.
    """
    cfg.validate(oracle.fp_length)
    policy = init_policy(oracle.fp_length, rng)
    entropy_log: list[float] = []
    iterations_done = 0
    try:
        initial = init_population(pool, cfg.population_size, oracle, rng)
        members: list[Candidate] = list(initial.members)  # MH walker states
        elites = Population(initial.members, cfg.population_size)
        stalled = 0
        while stalled < _STALL_GENERATIONS and (
            cfg.max_outer_iterations is None or iterations_done < cfg.max_outer_iterations
        ):
            probs = forward(policy)
            entropy_log.append(policy_entropy(probs))
            trace_mark = len(oracle.trace)
            member_grads: list[np.ndarray] = []
            new_states: list[Candidate] = []
            for member in members:
                actions = np.empty((cfg.n_repeats, oracle.fp_length), dtype=np.uint8)
                rewards = np.empty(cfg.n_repeats)
                best_idx = 0
                best_proposal: Candidate | None = None
                for j in range(cfg.n_repeats):
                    fp = mh_propose(member.fp, probs, cfg.mh_flip_count, rng)
                    proposal = Candidate(fp, oracle.evaluate(fp))
                    reward = _local_search(proposal, elites, cfg.ga_local, oracle, rng)
                    actions[j] = fp.bits
                    rewards[j] = reward
                    if best_proposal is None or reward > rewards[best_idx]:
                        best_idx = j
                        best_proposal = proposal
                batch = ActionBatch(actions, rewards)
                member_grads.append(reinforce_gradient(probs, batch, cfg.use_baseline))
                assert best_proposal is not None
                if mh_accept(member.score, rewards[best_idx], cfg.mh_beta, rng):
                    new_states.append(best_proposal)
                else:
                    new_states.append(member)
            grad = np.mean(member_grads, axis=0)
            adam_step(policy, grad, lr=cfg.learning_rate)
            members = new_states
            iterations_done += 1
            stalled = stalled + 1 if len(oracle.trace) == trace_mark else 0
    except BudgetExhausted:
        pass
    entropy_log.append(policy_entropy(forward(policy)))
    extras = {"policy_entropy": entropy_log, "outer_iterations": iterations_done}
    return _finalize(oracle, diversity_sim, extras)


def run_random_search(
    oracle: BudgetedOracle,
    pool: Sequence[Fingerprint],
    rng: np.random.Generator,
    diversity_sim: str = "tanimoto",
) -> RunResult:
    """Uniform random fingerprints until the budget is exhausted.

    The pool argument is accepted for driver-signature uniformity; random
    search does not use it.
    """
    del pool
    misses = 0
    try:
        while misses < _STALL_RANDOM_DRAWS:
            fp = random_fingerprint(oracle.fp_length, rng)
            before = len(oracle.trace)
            oracle.evaluate(fp)
            misses = 0 if len(oracle.trace) > before else misses + 1
    except BudgetExhausted:
        pass
    return _finalize(oracle, diversity_sim)
