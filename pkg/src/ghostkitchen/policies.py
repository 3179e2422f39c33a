"""Decision policies: FIFO, Integrated (LNS on immediate cost) and AI (LNS with VFA)."""

from __future__ import annotations

import dataclasses as dc
from enum import StrEnum

import numpy as np

from ghostkitchen.config import LnsConfig
from ghostkitchen.errors import ConfigError
from ghostkitchen.model import Decision, Facility, State
from ghostkitchen.solver import (
    DecisionEvaluator,
    ImmediateCost,
    SearchResult,
    VfaCost,
    fifo_insert,
    search,
)
from ghostkitchen.vfa import ValueNetwork


class PolicyKind(StrEnum):
    FIFO = "fifo"
    INTEGRATED = "integrated"
    AI = "ai"


@dc.dataclass(frozen=True)
class Outcome:
    decision: Decision
    search: SearchResult | None = None


@dc.dataclass(frozen=True)
class Policy:
    kind: PolicyKind
    lns: LnsConfig = LnsConfig()
    network: ValueNetwork | None = dc.field(default=None, compare=False)
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind is PolicyKind.AI and self.network is None:
            raise ConfigError("the AI policy needs a trained value network")
        if not self.label:
            object.__setattr__(self, "label", self.kind.value)

    @classmethod
    def fifo(cls) -> Policy:
        return cls(PolicyKind.FIFO)

    @classmethod
    def integrated(cls, lns: LnsConfig = LnsConfig()) -> Policy:
        return cls(PolicyKind.INTEGRATED, lns)

    @classmethod
    def ai(cls, network: ValueNetwork, lns: LnsConfig = LnsConfig(), label: str = "") -> Policy:
        return cls(PolicyKind.AI, lns, network, label)

    def decide(self, state: State, facility: Facility, rng: np.random.Generator) -> Outcome:
        """Plan the new order, or re-plan the residual orders at the last point.

        At the end of the capture phase no future cost remains, so the AI
        policy searches on immediate cost there.
        """
        evaluator: DecisionEvaluator
        match self.kind:
            case PolicyKind.FIFO:
                return Outcome(fifo_insert(state, facility))
            case PolicyKind.INTEGRATED:
                evaluator = ImmediateCost(facility)
            case PolicyKind.AI:
                assert self.network is not None
                if state.new_order is None:
                    evaluator = ImmediateCost(facility)
                else:
                    evaluator = VfaCost(facility, self.network)
        result = search(state, facility, self.lns, evaluator, rng)
        return Outcome(result.decision, result)
