"""Experiment configurations: the six built-in setups and the config file format.

Config files are flat TOML documents.  Keys (all others are rejected)::

    name         string
    kind         "m_best" | "multi_bandit"
    means        array of floats (m_best) or array of float arrays (multi_bandit)
    distribution "bernoulli" | "point_mass"           default "bernoulli"
    m_values     array of ints in 1..K-1              default [1, ..., K-1]; unused for multi_bandit
    budget       positive int or "auto"               default "auto"
    trials       int >= 1                             default 10000
    seed         int in [0, 2**64)                    default 0
    ties         "random" | "index"                   default "random"
    strategies   array of "sar" | "sr" | "uniform" | "gap_e(c=<float>)"
                                                      default all four (m_best), ["sar"] (multi_bandit)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Union

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .model import BanditInstance, MultiBanditInstance
from .simulation import (
    DEFAULT_TRIALS,
    TIES,
    StrategySpec,
    suggest_budget,
    suggest_budget_multibandit,
)

M_BEST = "m_best"
MULTI_BANDIT = "multi_bandit"
DISTRIBUTIONS = ("bernoulli", "point_mass")
DEFAULT_STRATEGIES = ("uniform", "sr", "sar", "gap_e(c=2)")
DEFAULT_SEED = 0
BUILTIN_SEED = 2012
# experiments average over tie orders so no arm position is favoured
DEFAULT_TIES = "random"

_KEYS = {"name", "kind", "means", "distribution", "m_values", "budget", "trials", "seed", "strategies", "ties"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    kind: str
    means: tuple
    distribution: str = "bernoulli"
    m_values: tuple[int, ...] = ()
    budget: Union[int, str] = "auto"
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    strategies: tuple[StrategySpec, ...] = field(default_factory=tuple)
    ties: str = DEFAULT_TIES
    description: str = field(default="", compare=False)

    @property
    def K(self) -> int:
        return len(self.means[0]) if self.kind == MULTI_BANDIT else len(self.means)

    def instance(self) -> Union[BanditInstance, MultiBanditInstance]:
        if self.kind == MULTI_BANDIT:
            if self.distribution == "bernoulli":
                return MultiBanditInstance.bernoulli(self.means)
            return MultiBanditInstance.point_mass(self.means)
        if self.distribution == "bernoulli":
            return BanditInstance.bernoulli(self.means)
        return BanditInstance.point_mass(self.means)

    def resolve_budget(self) -> int:
        """Explicit budget, or the suggested one (never below the SAR minimum)."""
        if self.budget != "auto":
            return int(self.budget)
        if self.kind == MULTI_BANDIT:
            M = len(self.means)
            return max(suggest_budget_multibandit(self.instance()), M * self.K + 1)
        return max(suggest_budget(self.means, self.m_values), self.K + 1)

    def with_overrides(self, **changes) -> "ExperimentConfig":
        return validate(replace(self, **changes))


def _m_best(name: str, description: str, means: list[float]) -> ExperimentConfig:
    K = len(means)
    return ExperimentConfig(
        name=name,
        kind=M_BEST,
        means=tuple(means),
        m_values=tuple(range(2, K)),
        budget="auto",
        trials=DEFAULT_TRIALS,
        seed=BUILTIN_SEED,
        strategies=tuple(StrategySpec.parse(s) for s in DEFAULT_STRATEGIES),
        description=description,
    )


def builtin_experiments() -> list[ExperimentConfig]:
    """The six Bernoulli experiments; the best arm always has mean 0.5."""
    return [
        _m_best("exp1", "One group of bad arms, K=20",
                [0.5] + [0.4] * 19),
        _m_best("exp2", "Two groups of bad arms, K=20",
                [0.5] + [0.42] * 5 + [0.38] * 14),
        _m_best("exp3", "Geometric progression, K=4",
                [0.5] + [0.5 - 0.37 ** i for i in range(2, 5)]),
        _m_best("exp4", "6 arms in three groups, K=6",
                [0.5, 0.42, 0.4, 0.4, 0.35, 0.35]),
        _m_best("exp5", "Arithmetic progression, K=15",
                [0.5] + [0.5 - 0.025 * i for i in range(2, 16)]),
        _m_best("exp6", "Three groups of bad arms, K=30",
                [0.5] + [0.45] * 5 + [0.43] * 14 + [0.38] * 10),
    ]


def builtin(number: int) -> ExperimentConfig:
    experiments = builtin_experiments()
    if not 1 <= number <= len(experiments):
        raise ConfigError(f"experiment must be 1..{len(experiments)}, got {number}")
    return experiments[number - 1]


def _fail(what: str) -> None:
    raise ConfigError(what)


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if not isinstance(cfg.name, str) or not cfg.name:
        _fail("name: must be a non-empty string")
    if cfg.kind not in (M_BEST, MULTI_BANDIT):
        _fail(f"kind: must be {M_BEST!r} or {MULTI_BANDIT!r}, got {cfg.kind!r}")
    if cfg.distribution not in DISTRIBUTIONS:
        _fail(f"distribution: must be one of {DISTRIBUTIONS}, got {cfg.distribution!r}")

    rows = cfg.means if cfg.kind == MULTI_BANDIT else (cfg.means,)
    if not rows or any(not isinstance(r, tuple) for r in rows):
        _fail("means: multi_bandit means must be a non-empty array of arrays")
    for row in rows:
        if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in row):
            _fail("means: entries must be numbers")
        if any(not 0.0 <= v <= 1.0 or math.isnan(v) for v in row):
            _fail("means within [0,1]: every mean must lie in [0,1]")
        if len(row) < 2:
            _fail("means: need K >= 2 arms")
    if len({len(r) for r in rows}) != 1:
        _fail("means: every problem must have the same number of arms")

    K = cfg.K
    if cfg.kind == M_BEST:
        if not cfg.m_values:
            _fail("m_values: must not be empty")
        for m in cfg.m_values:
            if isinstance(m, bool) or not isinstance(m, int) or not 1 <= m <= K - 1:
                _fail(f"m_values within 1..K-1: got {m!r} with K={K}")
    if cfg.budget != "auto":
        if isinstance(cfg.budget, bool) or not isinstance(cfg.budget, int) or cfg.budget < 1:
            _fail(f"budget: must be a positive integer or \"auto\", got {cfg.budget!r}")
    if isinstance(cfg.trials, bool) or not isinstance(cfg.trials, int) or cfg.trials < 1:
        _fail(f"trials >= 1: got {cfg.trials!r}")
    if isinstance(cfg.seed, bool) or not isinstance(cfg.seed, int) or not 0 <= cfg.seed < 2**64:
        _fail(f"seed: must be an integer in [0, 2**64), got {cfg.seed!r}")
    if cfg.ties not in TIES:
        _fail(f"ties: must be one of {TIES}, got {cfg.ties!r}")
    if not cfg.strategies:
        _fail("strategies: must not be empty")
    if cfg.kind == MULTI_BANDIT and any(s.name != "sar" for s in cfg.strategies):
        _fail("strategies: multi_bandit supports only \"sar\"")
    return cfg


def from_mapping(data: dict) -> ExperimentConfig:
    unknown = sorted(set(data) - _KEYS)
    if unknown:
        _fail(f"unknown key(s): {', '.join(unknown)}")
    for key in ("name", "kind", "means"):
        if key not in data:
            _fail(f"{key}: required key missing")
    kind = data["kind"]
    means = data["means"]
    if not isinstance(means, list):
        _fail("means: must be an array")
    if kind == MULTI_BANDIT:
        means = tuple(tuple(r) if isinstance(r, list) else r for r in means)
    else:
        if any(isinstance(v, list) for v in means):
            _fail("means: m_best means must be a flat array")
        means = tuple(means)
    K = len(means[0]) if kind == MULTI_BANDIT and means and isinstance(means[0], tuple) else len(means)

    default_m = () if kind == MULTI_BANDIT else tuple(range(1, K))
    default_strategies = ("sar",) if kind == MULTI_BANDIT else DEFAULT_STRATEGIES
    raw_strategies = data.get("strategies", list(default_strategies))
    if not isinstance(raw_strategies, list) or not all(isinstance(s, str) for s in raw_strategies):
        _fail("strategies: must be an array of strings")
    try:
        strategies = tuple(StrategySpec.parse(s) for s in raw_strategies)
    except ValueError as exc:
        raise ConfigError(f"strategies: {exc}") from None
    m_values = data.get("m_values", list(default_m))
    if not isinstance(m_values, list):
        _fail("m_values: must be an array")

    cfg = ExperimentConfig(
        name=data["name"],
        kind=kind,
        means=means,
        distribution=data.get("distribution", "bernoulli"),
        m_values=tuple(m_values),
        budget=data.get("budget", "auto"),
        trials=data.get("trials", DEFAULT_TRIALS),
        seed=data.get("seed", DEFAULT_SEED),
        strategies=strategies,
        ties=data.get("ties", DEFAULT_TIES),
    )
    return validate(cfg)


def loads(text: str) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from None
    return from_mapping(data)


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return loads(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _toml_value(value) -> str:
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    return "[" + ", ".join(_toml_value(v) for v in value) + "]"


def dumps(cfg: ExperimentConfig) -> str:
    lines = []
    if cfg.description:
        lines.append(f"# {cfg.description}")
    means = cfg.means
    fields = [
        ("name", cfg.name),
        ("kind", cfg.kind),
        ("distribution", cfg.distribution),
        ("means", [[float(v) for v in r] for r in means] if cfg.kind == MULTI_BANDIT
         else [float(v) for v in means]),
        ("m_values", list(cfg.m_values)),
        ("budget", cfg.budget),
        ("trials", cfg.trials),
        ("seed", cfg.seed),
        ("strategies", [str(s) for s in cfg.strategies]),
        ("ties", cfg.ties),
    ]
    lines.extend(f"{key} = {_toml_value(value)}" for key, value in fields)
    return "\n".join(lines) + "\n"
