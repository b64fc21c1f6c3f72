from __future__ import annotations

import os
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, NonNegativeInt, PositiveFloat, PositiveInt


class EngineName(str, Enum):
    BASELINE = "baseline"
    ACTOR = "actor"
    POOL = "pool"


class MplusPolicy(str, Enum):
    # interleave only at delays and pass Delay upward: baseline answer order
    ORDERED = "ordered"
    # resolve delays inside the request round, swap after every answer
    LOCAL_DELAY = "local-delay"


class DiffMode(str, Enum):
    ORDER = "order"
    MULTISET = "multiset"


def default_workers() -> int:
    return os.cpu_count() or 1


class EngineSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    engine: EngineName = EngineName.BASELINE
    workers: PositiveInt = Field(default_factory=default_workers)
    mplus_policy: MplusPolicy = MplusPolicy.ORDERED
    check_protocol: bool = False
    # random pause before each pool task, to shake out lost wakeups
    jitter: NonNegativeFloat = 0.0
    poll_interval: PositiveFloat = 0.05


class RunSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    timeout: PositiveFloat = 10.0
    limit: NonNegativeInt | None = None
    override_limit: bool = False


class BenchSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    nums: list[NonNegativeInt] = Field(default_factory=lambda: [16, 64, 128, 256, 512, 1024])
    engines: list[EngineName] = Field(
        default_factory=lambda: [EngineName.BASELINE, EngineName.ACTOR, EngineName.POOL]
    )
    workers: list[PositiveInt] = Field(default_factory=lambda: [1, 2, 4, 8])
    repeats: PositiveInt = 5
    timeout: PositiveFloat = 600.0
    disj_conc: bool = False
