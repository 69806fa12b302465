"""archipelago: adaptive island-model evolutionary search over candidate programs.

A single accumulated-improvement signal per island drives three coupled
adaptation levels: exploration intensity within an island, decayed-UCB
compute routing across islands, and tactic generation when the whole search
stagnates. The mutation operator is pluggable: a hosted chat model or a
deterministic scripted mock.
"""

from .config import ConfigError, RunConfig
from .engine import Engine, run, update_state
from .evaluation import EvaluationResult, EvaluatorSpec, evaluate
from .operators import HttpChatOperator, MockScriptOperator, OperatorError
from .state import (
    AdaptiveSignals,
    CheckpointError,
    GlobalState,
    IslandState,
    ProgramRecord,
    TacticRecord,
    checkpoint,
    new_run,
    restore,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveSignals",
    "CheckpointError",
    "ConfigError",
    "Engine",
    "EvaluationResult",
    "EvaluatorSpec",
    "GlobalState",
    "HttpChatOperator",
    "IslandState",
    "MockScriptOperator",
    "OperatorError",
    "ProgramRecord",
    "RunConfig",
    "TacticRecord",
    "checkpoint",
    "evaluate",
    "new_run",
    "restore",
    "run",
    "update_state",
]
