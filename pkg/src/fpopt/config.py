"""Experiment configuration: YAML schema, strict validation, seed derivation.

One config file describes one experiment: a single oracle, one or more
algorithms, a budget, and a seed protocol. Validation happens before any
oracle is constructed; unknown keys are rejected with the offending line.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .bridge import EndpointConfig
from .search import DReinforceConfig, GAConfig

ALGORITHM_NAMES = ("ga", "dreinforce", "random")


class ConfigError(Exception):
    """Invalid experiment configuration; maps to exit code 2."""


class _LineDict(dict):
    """Mapping that remembers the source line of each key."""

    def __init__(self) -> None:
        super().__init__()
        self.key_lines: dict[Any, int] = {}


class _Loader(yaml.SafeLoader):
    pass


def _construct_mapping(loader: _Loader, node: yaml.MappingNode) -> _LineDict:
    loader.flatten_mapping(node)
    data = _LineDict()
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=True)
        if key in data:
            raise ConfigError(
                f"line {key_node.start_mark.line + 1}: duplicate key {key!r}"
            )
        data[key] = loader.construct_object(value_node, deep=True)
        data.key_lines[key] = key_node.start_mark.line + 1
    return data


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


class _Section:
    """Typed, consuming view over one mapping; leftovers are schema errors."""

    def __init__(self, data: dict, path: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a mapping, got {type(data).__name__}")
        self._data = dict(data)
        self._lines = data.key_lines if isinstance(data, _LineDict) else {}
        self._path = path

    def _describe(self, key: str) -> str:
        line = self._lines.get(key)
        at = f" (line {line})" if line else ""
        return f"{self._path}.{key}{at}"

    def has(self, key: str) -> bool:
        return key in self._data

    def take(self, key: str, default: Any = None) -> Any:
        return self._data.pop(key, default)

    def take_int(self, key: str, default: int | None = None, minimum: int | None = None) -> int:
        if key not in self._data:
            if default is None:
                raise ConfigError(f"{self._path}: missing required key {key!r}")
            return default
        value = self._data.pop(key)
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{self._describe(key)}: expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise ConfigError(f"{self._describe(key)}: must be >= {minimum}, got {value}")
        return value

    def take_float(
        self, key: str, default: float | None = None, minimum: float | None = None,
        maximum: float | None = None,
    ) -> float:
        if key not in self._data:
            if default is None:
                raise ConfigError(f"{self._path}: missing required key {key!r}")
            return default
        value = self._data.pop(key)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"{self._describe(key)}: expected a number, got {value!r}")
        value = float(value)
        if minimum is not None and value < minimum:
            raise ConfigError(f"{self._describe(key)}: must be >= {minimum}, got {value}")
        if maximum is not None and value > maximum:
            raise ConfigError(f"{self._describe(key)}: must be <= {maximum}, got {value}")
        return value

    def take_str(
        self, key: str, default: str | None = None, choices: tuple[str, ...] | None = None,
        required: bool = False,
    ) -> str | None:
        if key not in self._data:
            if required:
                raise ConfigError(f"{self._path}: missing required key {key!r}")
            return default
        value = self._data.pop(key)
        if not isinstance(value, str):
            raise ConfigError(f"{self._describe(key)}: expected a string, got {value!r}")
        if choices is not None and value not in choices:
            raise ConfigError(
                f"{self._describe(key)}: expected one of {list(choices)}, got {value!r}"
            )
        return value

    def take_bool(self, key: str, default: bool) -> bool:
        if key not in self._data:
            return default
        value = self._data.pop(key)
        if not isinstance(value, bool):
            raise ConfigError(f"{self._describe(key)}: expected true/false, got {value!r}")
        return value

    def take_section(self, key: str, required: bool = False) -> "_Section | None":
        if key not in self._data:
            if required:
                raise ConfigError(f"{self._path}: missing required section {key!r}")
            return None
        value = self._data.pop(key)
        if value is None:
            value = _LineDict()
        return _Section(value, f"{self._path}.{key}")

    def take_all(self) -> dict:
        out = dict(self._data)
        self._data.clear()
        return out

    def finish(self) -> None:
        if self._data:
            key = next(iter(self._data))
            raise ConfigError(f"{self._describe(key)}: unknown key {key!r}")


@dataclass
class OracleConfig:
    family: str  # synthetic family name, or "external"
    length: int
    seed: int = 0
    name: str | None = None
    params: dict = field(default_factory=dict)
    endpoint: EndpointConfig | None = None

    def spec_dict(self) -> dict:
        """Spec usable with synthetic.make_oracle (synthetic families only)."""
        return {
            "family": self.family,
            "length": self.length,
            "seed": self.seed,
            "params": dict(self.params),
        }


@dataclass
class AlgorithmConfig:
    name: str
    ga: GAConfig | None = None
    dreinforce: DReinforceConfig | None = None


@dataclass
class PoolConfig:
    path: str | None = None
    count: int = 256
    sparsity: float | None = None  # None: family default


@dataclass
class RunConfig:
    oracle: OracleConfig
    algorithms: list[AlgorithmConfig]
    budget: int = 10_000
    master_seed: int = 0
    n_seeds: int = 5
    diversity_sim: str = "tanimoto"
    pool: PoolConfig = field(default_factory=PoolConfig)
    output_dir: str = "runs"


def _parse_ga(section: _Section | None, fp_length: int) -> GAConfig:
    cfg = GAConfig()
    if section is not None:
        cfg.population_size = section.take_int("population_size", cfg.population_size, minimum=1)
        cfg.offspring_size = section.take_int("offspring_size", cfg.offspring_size, minimum=1)
        cfg.mutation_prob = section.take_float("mutation_prob", cfg.mutation_prob, 0.0, 1.0)
        cfg.flips_per_mutation = section.take_int(
            "flips_per_mutation", cfg.flips_per_mutation, minimum=1
        )
        cfg.n_iterations = section.take_int("n_iterations", cfg.n_iterations, minimum=1)
        section.finish()
    try:
        cfg.validate(fp_length)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def _parse_dreinforce(section: _Section | None, fp_length: int) -> DReinforceConfig:
    cfg = DReinforceConfig()
    if section is not None:
        cfg.population_size = section.take_int("population_size", cfg.population_size, minimum=1)
        cfg.n_repeats = section.take_int("n_repeats", cfg.n_repeats, minimum=1)
        cfg.mh_flip_count = section.take_int("mh_flip_count", cfg.mh_flip_count, minimum=1)
        cfg.mh_beta = section.take_float("mh_beta", cfg.mh_beta, minimum=0.0)
        cfg.learning_rate = section.take_float("learning_rate", cfg.learning_rate, minimum=0.0)
        cfg.use_baseline = section.take_bool("use_baseline", cfg.use_baseline)
        if section.has("max_outer_iterations"):
            raw = section.take("max_outer_iterations")
            if raw is not None:  # null means unlimited, same as omitting the key
                if not isinstance(raw, int) or isinstance(raw, bool) or raw < 1:
                    raise ConfigError(
                        f"max_outer_iterations: expected a positive integer or null, got {raw!r}"
                    )
                cfg.max_outer_iterations = raw
        ga_section = section.take_section("ga_local")
        if ga_section is not None:
            local = cfg.ga_local
            local.population_size = ga_section.take_int("population_size", local.population_size, minimum=1)
            local.offspring_size = ga_section.take_int("offspring_size", local.offspring_size, minimum=1)
            local.mutation_prob = ga_section.take_float("mutation_prob", local.mutation_prob, 0.0, 1.0)
            local.flips_per_mutation = ga_section.take_int(
                "flips_per_mutation", local.flips_per_mutation, minimum=1
            )
            local.n_iterations = ga_section.take_int("n_iterations", local.n_iterations, minimum=1)
            ga_section.finish()
        section.finish()
    try:
        cfg.validate(fp_length)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def _parse_oracle(section: _Section) -> OracleConfig:
    family = section.take_str(
        "family", required=True,
        choices=("onemax", "hidden_target", "nk", "ising", "external"),
    )
    length = section.take_int("length", minimum=4)
    if length % 4 != 0:
        raise ConfigError(f"oracle.length: must be a multiple of 4, got {length}")
    seed = section.take_int("seed", 0)
    name = section.take_str("name")
    params_section = section.take_section("params")
    params = params_section.take_all() if params_section is not None else {}
    endpoint = None
    if family == "external":
        if params:
            raise ConfigError("oracle.params: external oracles take no params")
        spawn = section.take("spawn")
        socket_path = section.take_str("socket")
        timeout_s = section.take_float("timeout_s", 60.0, minimum=0.001)
        if spawn is not None:
            if not (isinstance(spawn, list) and spawn and all(isinstance(s, str) for s in spawn)):
                raise ConfigError("oracle.spawn: expected a non-empty list of strings")
            spawn = tuple(spawn)
        try:
            endpoint = EndpointConfig(spawn=spawn, socket_path=socket_path, timeout_s=timeout_s)
        except ValueError as exc:
            raise ConfigError(f"oracle: {exc}") from None
    else:
        # Validate params eagerly so errors surface before any run starts.
        from .synthetic import make_oracle

        try:
            probe = make_oracle(
                {"family": family, "length": length, "seed": seed, "params": dict(params)}
            )
        except ValueError as exc:
            raise ConfigError(f"oracle: {exc}") from None
        if name is None:
            name = probe.name
    section.finish()
    if name is None:
        name = "external"
    return OracleConfig(
        family=family, length=length, seed=seed, name=name, params=params, endpoint=endpoint
    )


def parse_config(data: Any, source: str = "config") -> RunConfig:
    root = _Section(data if data is not None else _LineDict(), source)
    oracle = _parse_oracle(root.take_section("oracle", required=True))
    budget = root.take_int("budget", 10_000, minimum=1)
    master_seed = root.take_int("master_seed", 0)
    n_seeds = root.take_int("n_seeds", 5, minimum=1)
    diversity_sim = root.take_str("diversity_sim", "tanimoto", choices=("tanimoto", "cosine"))
    output_dir = root.take_str("output_dir", "runs")

    algo_list = root.take("algorithms")
    if algo_list is None:
        raise ConfigError(f"{source}: missing required section 'algorithms'")
    if not isinstance(algo_list, list) or not algo_list:
        raise ConfigError(f"{source}.algorithms: expected a non-empty list")
    algorithms: list[AlgorithmConfig] = []
    seen_names: set[str] = set()
    for i, item in enumerate(algo_list):
        path = f"{source}.algorithms[{i}]"
        if isinstance(item, str):
            item_section = _Section(_LineDict(), path)
            algo_name = item
        else:
            item_section = _Section(item, path)
            algo_name = item_section.take_str("name", required=True, choices=ALGORITHM_NAMES)
        if algo_name not in ALGORITHM_NAMES:
            raise ConfigError(f"{path}: unknown algorithm {algo_name!r}")
        if algo_name in seen_names:
            raise ConfigError(f"{path}: duplicate algorithm {algo_name!r}")
        seen_names.add(algo_name)
        params = item_section.take_section("params")
        if algo_name == "ga":
            algorithms.append(AlgorithmConfig("ga", ga=_parse_ga(params, oracle.length)))
        elif algo_name == "dreinforce":
            algorithms.append(
                AlgorithmConfig("dreinforce", dreinforce=_parse_dreinforce(params, oracle.length))
            )
        else:
            if params is not None:
                params.finish()
            algorithms.append(AlgorithmConfig("random"))
        item_section.finish()

    pool = PoolConfig()
    pool_section = root.take_section("seed_pool")
    if pool_section is not None:
        pool.path = pool_section.take_str("path")
        gen = pool_section.take_section("generate")
        if gen is not None:
            if pool.path is not None:
                raise ConfigError("seed_pool: give either path or generate, not both")
            pool.count = gen.take_int("count", pool.count, minimum=1)
            if gen.has("sparsity"):
                pool.sparsity = gen.take_float("sparsity", minimum=1e-9, maximum=1.0)
            gen.finish()
        pool_section.finish()
    root.finish()

    config = RunConfig(
        oracle=oracle,
        algorithms=algorithms,
        budget=budget,
        master_seed=master_seed,
        n_seeds=n_seeds,
        diversity_sim=diversity_sim,
        pool=pool,
        output_dir=output_dir,
    )
    _cross_validate(config)
    return config


def _cross_validate(config: RunConfig) -> None:
    for algo in config.algorithms:
        pop = None
        if algo.ga is not None:
            pop = algo.ga.population_size
        if algo.dreinforce is not None:
            pop = algo.dreinforce.population_size
        if pop is not None and config.budget < pop:
            raise ConfigError(
                f"budget {config.budget} is smaller than {algo.name} population size {pop}"
            )
        if pop is not None and config.pool.path is None and config.pool.count < pop:
            raise ConfigError(
                f"seed_pool.generate.count {config.pool.count} is smaller than "
                f"{algo.name} population size {pop}"
            )


def parse_config_text(text: str, source: str = "config") -> RunConfig:
    try:
        data = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark else source
        raise ConfigError(f"{where}: YAML parse error: {exc}") from exc
    return parse_config(data, source=source)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def config_echo(config: RunConfig) -> dict:
    """Fully resolved config as plain data; reloading it reproduces the run."""
    oracle: dict[str, Any] = {
        "family": config.oracle.family,
        "length": config.oracle.length,
        "seed": config.oracle.seed,
        "name": config.oracle.name,
    }
    if config.oracle.params:
        oracle["params"] = dict(config.oracle.params)
    if config.oracle.endpoint is not None:
        ep = config.oracle.endpoint
        if ep.spawn is not None:
            oracle["spawn"] = list(ep.spawn)
        if ep.socket_path is not None:
            oracle["socket"] = ep.socket_path
        oracle["timeout_s"] = ep.timeout_s
    algorithms: list[dict] = []
    for algo in config.algorithms:
        entry: dict[str, Any] = {"name": algo.name}
        if algo.ga is not None:
            entry["params"] = {
                "population_size": algo.ga.population_size,
                "offspring_size": algo.ga.offspring_size,
                "mutation_prob": algo.ga.mutation_prob,
                "flips_per_mutation": algo.ga.flips_per_mutation,
                "n_iterations": algo.ga.n_iterations,
            }
        if algo.dreinforce is not None:
            d = algo.dreinforce
            entry["params"] = {
                "population_size": d.population_size,
                "n_repeats": d.n_repeats,
                "mh_flip_count": d.mh_flip_count,
                "mh_beta": d.mh_beta,
                "learning_rate": d.learning_rate,
                "use_baseline": d.use_baseline,
                "ga_local": {
                    "population_size": d.ga_local.population_size,
                    "offspring_size": d.ga_local.offspring_size,
                    "mutation_prob": d.ga_local.mutation_prob,
                    "flips_per_mutation": d.ga_local.flips_per_mutation,
                    "n_iterations": d.ga_local.n_iterations,
                },
            }
            if d.max_outer_iterations is not None:
                entry["params"]["max_outer_iterations"] = d.max_outer_iterations
        algorithms.append(entry)
    echo: dict[str, Any] = {
        "oracle": oracle,
        "algorithms": algorithms,
        "budget": config.budget,
        "master_seed": config.master_seed,
        "n_seeds": config.n_seeds,
        "diversity_sim": config.diversity_sim,
        "output_dir": config.output_dir,
    }
    if config.pool.path is not None:
        echo["seed_pool"] = {"path": config.pool.path}
    else:
        gen: dict[str, Any] = {"count": config.pool.count}
        if config.pool.sparsity is not None:
            gen["sparsity"] = config.pool.sparsity
        echo["seed_pool"] = {"generate": gen}
    return echo


def derive_run_seed(master_seed: int, seed_index: int, oracle_name: str, algo_name: str) -> int:
    """Stable per-run seed; adding an algorithm never perturbs existing runs."""
    key = f"{master_seed}|{seed_index}|{oracle_name}|{algo_name}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


def derive_pool_seed(master_seed: int) -> int:
    key = f"{master_seed}|seed-pool".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")
