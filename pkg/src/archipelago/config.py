"""Run configuration: every engine tunable with its default, plus validation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

MAXIMIZE = "maximize"
MINIMIZE = "minimize"


class ConfigError(ValueError):
    """A run configuration failed validation."""


@dataclass
class RunConfig:
    """All engine tunables.

    Only ``model_name`` and ``budget`` are meant to be supplied by the user;
    everything else carries a working default.
    """

    model_name: str = "mock"
    budget: int = 100          # total evolution iterations (0 = no-op run)
    seed: int = 0
    objective_sense: str = MAXIMIZE

    # Level 1: within-island exploration intensity
    intensity_min: float = 0.1
    intensity_max: float = 0.7
    decay: float = 0.9         # shared by the improvement signal and the bandit stats
    epsilon: float = 1e-8      # guards both the improvement denominator and the intensity radicand

    # Level 2: cross-island scheduling
    ucb_c: float = math.sqrt(2.0)
    spawn_threshold: float = 0.02
    meta_threshold: float = 0.12
    migration_interval: int = 15
    migration_count: int = 1
    initial_islands: int = 2

    # Ablation switches
    local_adaptation: bool = True
    bandit_selection: bool = True
    dynamic_spawning: bool = True
    meta_guidance: bool = True
    fixed_island_count: int | None = None

    # Plumbing
    fixed_exploration_rate: float = 0.3   # used when local_adaptation is off
    inspiration_count: int = 3
    tactic_patience: int = 8              # trials without improvement before a tactic rotates out
    sentinel_fitness: float = -1e18
    eval_timeout: float = 60.0
    primary_metric: str = "combined_score"
    checkpoint_interval: int = 10
    warmup_iterations: int = 10           # spawn/meta predicates stay off before this iteration
    warmup_min_visits: int = 3            # ... and until every island has this many visits
    spawn_cooldown: int | None = None     # defaults to migration_interval
    archive_max_size: int | None = None

    def validate(self) -> None:
        """Raise ConfigError on the first violated constraint."""
        if not 0.0 <= self.intensity_min < self.intensity_max <= 1.0:
            raise ConfigError(
                f"need 0 <= intensity_min < intensity_max <= 1, "
                f"got [{self.intensity_min}, {self.intensity_max}]"
            )
        if not 0.0 <= self.decay < 1.0:
            raise ConfigError(f"decay must be in [0, 1), got {self.decay}")
        if self.epsilon <= 0.0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if self.ucb_c <= 0.0:
            raise ConfigError(f"ucb_c must be > 0, got {self.ucb_c}")
        if self.spawn_threshold < 0.0 or self.meta_threshold < 0.0:
            raise ConfigError("stagnation thresholds must be >= 0")
        if self.migration_interval < 1:
            raise ConfigError(f"migration_interval must be >= 1, got {self.migration_interval}")
        if self.migration_count < 1:
            raise ConfigError(f"migration_count must be >= 1, got {self.migration_count}")
        if self.initial_islands < 1:
            raise ConfigError(f"initial_islands must be >= 1, got {self.initial_islands}")
        # budget 0 is a permitted no-op run (the engine returns the seed).
        if self.budget < 0:
            raise ConfigError(f"budget must be >= 0, got {self.budget}")
        if self.objective_sense not in (MAXIMIZE, MINIMIZE):
            raise ConfigError(f"objective_sense must be maximize|minimize, got {self.objective_sense!r}")
        if self.fixed_island_count is not None and self.fixed_island_count < 1:
            raise ConfigError(f"fixed_island_count must be >= 1, got {self.fixed_island_count}")
        if not 0.0 <= self.fixed_exploration_rate <= 1.0:
            raise ConfigError("fixed_exploration_rate must be in [0, 1]")
        if self.inspiration_count < 0:
            raise ConfigError("inspiration_count must be >= 0")
        if self.tactic_patience < 1:
            raise ConfigError("tactic_patience must be >= 1")
        if self.eval_timeout <= 0:
            raise ConfigError("eval_timeout must be > 0")
        if self.checkpoint_interval < 1:
            raise ConfigError("checkpoint_interval must be >= 1")
        if self.warmup_iterations < 0 or self.warmup_min_visits < 0:
            raise ConfigError("warmup settings must be >= 0")
        if self.archive_max_size is not None and self.archive_max_size < 1:
            raise ConfigError("archive_max_size must be >= 1 when set")

    @property
    def effective_spawn_cooldown(self) -> int:
        return self.migration_interval if self.spawn_cooldown is None else self.spawn_cooldown

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)


def to_internal(value: float, sense: str) -> float:
    """Map a raw evaluator score to the engine's internal maximize convention."""
    return -value if sense == MINIMIZE else value


def to_raw(value: float, sense: str) -> float:
    """Undo `to_internal` for display and reports."""
    return -value if sense == MINIMIZE else value
