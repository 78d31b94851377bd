"""In-process oracle landscapes: hidden target, one-max, NK, Ising.

Desk-scale stand-ins for expensive chemistry scorers. Each family is fully
determined by its spec (family name, length, seed, params), is immutable
after construction, and scores in [0, 1] with 1 optimal.
"""

from __future__ import annotations

from typing import Any, Iterator

import numpy as np

from .fingerprint import (
    Fingerprint,
    SimilarityFn,
    similarity_by_name,
)
from .oracle import Oracle

_ENUMERATION_LIMIT = 20  # largest N for exact optima / exact Ising bounds
_ENUM_BLOCK = 1 << 14


class OneMaxOracle(Oracle):
    """score = popcount / length; sanity-check landscape."""

    def __init__(self, length: int):
        self.name = f"onemax-L{length}"
        self.fp_length = length

    def evaluate(self, fp: Fingerprint) -> float:
        return fp.popcount / self.fp_length


class HiddenTargetOracle(Oracle):
    """score = sim(fp, hidden target); the target itself scores 1.0.

    Analog of rediscovery/similarity objectives. Targets default to L/8 set
    bits to mimic sparse structural fingerprints.
    """

    def __init__(self, target: Fingerprint, sim_kind: str = "tanimoto"):
        if target.popcount == 0:
            raise ValueError("hidden target must have at least one set bit")
        self.target = target
        self.sim_kind = sim_kind
        self._sim: SimilarityFn = similarity_by_name(sim_kind)
        self.name = f"hidden-{sim_kind}-L{target.length}"
        self.fp_length = target.length

    @classmethod
    def random(
        cls,
        length: int,
        seed: int | np.random.Generator,
        sim_kind: str = "tanimoto",
        target_bits: int | None = None,
    ) -> "HiddenTargetOracle":
        rng = np.random.default_rng(seed)
        n_bits = length // 8 if target_bits is None else int(target_bits)
        if not 1 <= n_bits <= length:
            raise ValueError(f"target_bits must be in [1, {length}], got {n_bits}")
        bits = np.zeros(length, dtype=np.uint8)
        bits[rng.choice(length, size=n_bits, replace=False)] = 1
        return cls(Fingerprint(bits), sim_kind)

    def evaluate(self, fp: Fingerprint) -> float:
        return self._sim(fp, self.target)


class NKLandscapeOracle(Oracle):
    """Kauffman NK landscape over the fingerprint bits.

    Each position i contributes table[i][ctx] where ctx indexes the values of
    bit i (highest order) followed by its K neighbors. Contributions are
    uniform [0, 1], so the mean score stays in [0, 1]. Neighbors are drawn
    without replacement, excluding the position itself.
    """

    def __init__(self, n: int, k: int, seed: int | np.random.Generator):
        if k < 0:
            raise ValueError(f"K must be >= 0, got {k}")
        if k >= n:
            raise ValueError(f"K must be < N, got K={k}, N={n}")
        rng = np.random.default_rng(seed)
        self.n = n
        self.k = k
        self.name = f"nk-N{n}-K{k}"
        self.fp_length = n
        self.neighbors = np.empty((n, k), dtype=np.intp)
        for i in range(n):
            pool = np.concatenate([np.arange(i), np.arange(i + 1, n)])
            self.neighbors[i] = rng.choice(pool, size=k, replace=False) if k else []
        self.tables = rng.random((n, 1 << (k + 1)))
        self._pow2 = (1 << np.arange(k - 1, -1, -1)) if k else np.empty(0, dtype=np.int64)
        if k == 0:
            # With no interactions the optimum is separable: pick the better
            # table entry per bit. The greedy argmax must reproduce it.
            greedy = Fingerprint(np.argmax(self.tables, axis=1).astype(np.uint8))
            analytic = float(np.max(self.tables, axis=1).mean())
            assert abs(self.evaluate(greedy) - analytic) < 1e-12

        self.tables.setflags(write=False)
        self.neighbors.setflags(write=False)

    def _context_indices(self, bits: np.ndarray) -> np.ndarray:
        """Table row indices for a bit matrix of shape (..., n)."""
        own = bits.astype(np.int64) << self.k
        if self.k:
            nbr = bits[..., self.neighbors].astype(np.int64) @ self._pow2
            return own + nbr
        return own

    def evaluate(self, fp: Fingerprint) -> float:
        idx = self._context_indices(fp.bits)
        return float(self.tables[np.arange(self.n), idx].mean())

    def scores_for_block(self, bits_block: np.ndarray) -> np.ndarray:
        """Vectorized scores for a (rows, n) bit matrix; used for enumeration."""
        idx = self._context_indices(bits_block)
        return self.tables[np.arange(self.n)[None, :], idx].mean(axis=1)


class IsingOracle(Oracle):
    """Random spin-glass energy, affinely normalized so the ground state is 1.

    Bits map to spins s = 2b - 1; E = -sum_{(i,j) in edges} J_ij s_i s_j.
    For N <= 20 the energy bounds are exact (full enumeration); above that,
    +-sum|J| bounds are used, which still pin scores inside [0, 1].
    """

    def __init__(self, n: int, density: float, seed: int | np.random.Generator):
        if n < 2:
            raise ValueError(f"Ising landscape needs n >= 2, got {n}")
        if not 0.0 < density <= 1.0:
            raise ValueError(f"density must be in (0, 1], got {density}")
        rng = np.random.default_rng(seed)
        self.n = n
        self.density = density
        self.name = f"ising-N{n}"
        self.fp_length = n
        iu, ju = np.triu_indices(n, k=1)
        mask = rng.random(iu.size) < density
        self.edge_i = iu[mask]
        self.edge_j = ju[mask]
        self.couplings = rng.normal(0.0, 1.0, size=int(mask.sum()))
        if n <= _ENUMERATION_LIMIT:
            self.e_min, self.e_max = self._exact_bounds()
            self.bounds_exact = True
        else:
            total = float(np.abs(self.couplings).sum())
            self.e_min, self.e_max = -total, total
            self.bounds_exact = False
        for arr in (self.edge_i, self.edge_j, self.couplings):
            arr.setflags(write=False)

    def _energy_block(self, bits_block: np.ndarray) -> np.ndarray:
        spins = bits_block.astype(np.float64) * 2.0 - 1.0
        if self.couplings.size == 0:
            return np.zeros(bits_block.shape[0])
        return -(spins[:, self.edge_i] * spins[:, self.edge_j]) @ self.couplings

    def _exact_bounds(self) -> tuple[float, float]:
        e_min = np.inf
        e_max = -np.inf
        for block in _enumerate_bit_blocks(self.n):
            energies = self._energy_block(block)
            e_min = min(e_min, float(energies.min()))
            e_max = max(e_max, float(energies.max()))
        return e_min, e_max

    def evaluate(self, fp: Fingerprint) -> float:
        energy = float(self._energy_block(fp.bits[None, :])[0])
        span = self.e_max - self.e_min
        if span == 0.0:
            return 1.0  # all states share one energy, every state is optimal
        return (self.e_max - energy) / span

    def scores_for_block(self, bits_block: np.ndarray) -> np.ndarray:
        span = self.e_max - self.e_min
        if span == 0.0:
            return np.ones(bits_block.shape[0])
        return (self.e_max - self._energy_block(bits_block)) / span


def _enumerate_bit_blocks(n: int, block: int = _ENUM_BLOCK) -> Iterator[np.ndarray]:
    """Yield all 2^n bit rows as (rows, n) uint8 blocks, ascending integer order."""
    total = 1 << n
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)
    for start in range(0, total, block):
        codes = np.arange(start, min(start + block, total), dtype=np.uint64)
        yield ((codes[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


_FAMILIES = ("onemax", "hidden_target", "nk", "ising")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


def make_oracle(spec: dict[str, Any]) -> Oracle:
    """Build a synthetic oracle from a spec dict.

    Keys: ``family`` (onemax | hidden_target | nk | ising), ``length``,
    ``seed`` (ignored by onemax), family params under ``params``. The same
    spec always produces an identical score function.
    """
    family = spec.get("family")
    _require(family in _FAMILIES, f"unknown oracle family {family!r}, expected one of {_FAMILIES}")
    length = spec.get("length")
    _require(isinstance(length, int) and length > 0, f"oracle length must be a positive int, got {length!r}")
    _require(length % 4 == 0, f"oracle length must be a multiple of 4, got {length}")
    params = dict(spec.get("params") or {})
    seed = spec.get("seed", 0)

    if family == "onemax":
        _require(not params, f"onemax takes no params, got {sorted(params)}")
        return OneMaxOracle(length)
    if family == "hidden_target":
        sim_kind = params.pop("sim", "tanimoto")
        target_bits = params.pop("target_bits", None)
        _require(not params, f"unknown hidden_target params {sorted(params)}")
        return HiddenTargetOracle.random(length, seed, sim_kind=sim_kind, target_bits=target_bits)
    if family == "nk":
        k = params.pop("k", 2)
        _require(not params, f"unknown nk params {sorted(params)}")
        return NKLandscapeOracle(length, k, seed)
    # ising
    density = params.pop("density", 0.25)
    _require(not params, f"unknown ising params {sorted(params)}")
    return IsingOracle(length, density, seed)


def best_known(spec: dict[str, Any]) -> float | None:
    """Exact optimum score for a spec, or None when it is not computable.

    onemax and hidden_target are 1.0 by construction; K=0 NK landscapes have
    a separable analytic optimum; NK and Ising with N <= 20 are enumerated
    exhaustively.
    """
    family = spec.get("family")
    if family in ("onemax", "hidden_target"):
        make_oracle(spec)  # surface validation errors consistently
        return 1.0
    oracle = make_oracle(spec)
    if isinstance(oracle, NKLandscapeOracle):
        if oracle.k == 0:
            return float(np.max(oracle.tables, axis=1).mean())
        if oracle.n <= _ENUMERATION_LIMIT:
            return _enumerated_max(oracle)
        return None
    if isinstance(oracle, IsingOracle):
        if oracle.n <= _ENUMERATION_LIMIT:
            return _enumerated_max(oracle)
        return None
    return None


def _enumerated_max(oracle: NKLandscapeOracle | IsingOracle) -> float:
    best = -np.inf
    for block in _enumerate_bit_blocks(oracle.n):
        best = max(best, float(oracle.scores_for_block(block).max()))
    return best
