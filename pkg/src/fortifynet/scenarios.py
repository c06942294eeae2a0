"""Disruption scenarios: the built-in Sioux Falls catalog and measure-driven generation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .measures import Category, MeasureKind, MeasureVector, rank_nodes
from .network import Network

DEFAULT_GAMMA = 0.5
HIGH_RISK_THRESHOLD = 0.06


@dataclass(frozen=True)
class Scenario:
    id: str
    measure: MeasureKind | None
    affected: Mapping[int, float]
    probability: float
    gamma_default: float = DEFAULT_GAMMA
    # Per-link mitigation overrides, link id -> gamma.
    gamma: Mapping[int, float] = field(default_factory=dict)
    notes: str = ""

    def __post_init__(self):
        if not self.affected:
            raise ValueError(f"scenario {self.id}: no affected nodes")
        for node, rate in self.affected.items():
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"scenario {self.id}: rate {rate} of node {node} outside [0, 1]")
        for lid, g in self.gamma.items():
            if not 0.0 <= g <= 1.0:
                raise ValueError(f"scenario {self.id}: gamma {g} of link {lid} outside [0, 1]")
        if not 0.0 <= self.gamma_default <= 1.0:
            raise ValueError(f"scenario {self.id}: gamma_default outside [0, 1]")
        if not (self.probability >= 0.0 and math.isfinite(self.probability)):
            raise ValueError(f"scenario {self.id}: bad probability {self.probability}")
        object.__setattr__(self, "affected", dict(self.affected))
        object.__setattr__(self, "gamma", dict(self.gamma))

    def mitigation(self, link_id: int) -> float:
        return self.gamma.get(link_id, self.gamma_default)

    @property
    def risk(self) -> str:
        return "high" if self.probability >= HIGH_RISK_THRESHOLD else "low"

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "measure": self.measure.value if self.measure else None,
            "affected": {str(k): v for k, v in self.affected.items()},
            "gamma_default": self.gamma_default,
            "probability": self.probability,
        }
        if self.gamma:
            out["gamma"] = {str(k): v for k, v in self.gamma.items()}
        if self.notes:
            out["notes"] = self.notes
        return out

    @classmethod
    def from_dict(cls, d: Mapping) -> "Scenario":
        measure = d.get("measure")
        return cls(
            id=str(d["id"]),
            measure=MeasureKind(measure) if measure else None,
            affected={int(k): float(v) for k, v in d["affected"].items()},
            probability=float(d["probability"]),
            gamma_default=float(d.get("gamma_default", DEFAULT_GAMMA)),
            gamma={int(k): float(v) for k, v in d.get("gamma", {}).items()},
            notes=d.get("notes", ""),
        )


class ScenarioSet:
    def __init__(self, scenarios: Iterable[Scenario]):
        self.scenarios = tuple(scenarios)
        ids = [s.id for s in self.scenarios]
        if len(set(ids)) != len(ids):
            raise ValueError("scenario ids must be unique")

    def __iter__(self):
        return iter(self.scenarios)

    def __len__(self):
        return len(self.scenarios)

    def __getitem__(self, i):
        if isinstance(i, str):
            for s in self.scenarios:
                if s.id == i:
                    return s
            raise KeyError(i)
        return self.scenarios[i]

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.scenarios]

    @property
    def probabilities(self) -> list[float]:
        return [s.probability for s in self.scenarios]

    def total_probability(self) -> float:
        return math.fsum(self.probabilities)

    def is_normalized(self, tol: float = 1e-9) -> bool:
        return abs(self.total_probability() - 1.0) <= tol

    def check(self, network: Network) -> None:
        for s in self.scenarios:
            for node in s.affected:
                if node not in network:
                    raise ValueError(f"scenario {s.id}: unknown node {node}")

    def with_gamma(self, gamma: float) -> "ScenarioSet":
        return ScenarioSet(
            Scenario(s.id, s.measure, s.affected, s.probability, gamma, {}, s.notes) for s in self.scenarios
        )

    def to_json(self) -> str:
        return json.dumps([s.to_dict() for s in self.scenarios], indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioSet":
        raw = json.loads(text)
        if isinstance(raw, dict):
            raw = raw["scenarios"]
        return cls(Scenario.from_dict(d) for d in raw)

    def __eq__(self, other):
        if not isinstance(other, ScenarioSet):
            return NotImplemented
        return self.scenarios == other.scenarios


def normalize_probabilities(scenarios: ScenarioSet) -> ScenarioSet:
    total = scenarios.total_probability()
    if not total > 0:
        raise ValueError("probabilities sum to zero")
    return ScenarioSet(
        Scenario(s.id, s.measure, s.affected, s.probability / total, s.gamma_default, s.gamma, s.notes)
        for s in scenarios
    )


# Sioux Falls disruption catalog: (measure, [(node, rate), ...], probability).
_CATALOG = [
    (MeasureKind.NEIGHBORHOOD_CONNECTIVITY,
     [(9, 0.7), (17, 0.65), (16, 0.65), (15, 0.65), (14, 0.65), (19, 0.65), (21, 0.65), (10, 0.65)], 0.08),
    (MeasureKind.PHI_NODE_CENTRALITY,
     [(2, 0.7), (6, 0.68), (8, 0.65), (1, 0.64), (7, 0.63), (3, 0.62), (12, 0.61), (18, 0.6)], 0.08),
    (MeasureKind.PAGE_RANK,
     [(10, 0.7), (8, 0.68), (11, 0.65), (20, 0.64), (22, 0.63), (16, 0.63), (15, 0.63), (3, 0.62)], 0.08),
    (MeasureKind.HARMONIC_CENTRALITY,
     [(10, 0.7), (11, 0.68), (16, 0.65), (15, 0.64), (8, 0.64), (20, 0.64), (9, 0.63), (22, 0.62)], 0.08),
    (MeasureKind.EIGENVECTOR_CENTRALITY,
     [(10, 0.7), (15, 0.68), (16, 0.66), (17, 0.64), (22, 0.64), (20, 0.63), (19, 0.62), (11, 0.61)], 0.06),
    (MeasureKind.KATZ_CENTRALITY,
     [(10, 0.7), (15, 0.7), (16, 0.7), (22, 0.7), (11, 0.7), (20, 0.7), (8, 0.7), (17, 0.7)], 0.06),
    (MeasureKind.CLOSENESS_CENTRALITY,
     [(10, 0.7), (11, 0.69), (16, 0.68), (15, 0.67), (9, 0.66), (17, 0.65), (14, 0.64), (12, 0.63)], 0.06),
    (MeasureKind.BETWEENNESS_CENTRALITY,
     [(10, 0.7), (11, 0.69), (8, 0.68), (12, 0.67), (16, 0.66), (15, 0.65), (20, 0.64), (4, 0.63)], 0.05),
    (MeasureKind.DEGREE_CENTRALITY,
     [(10, 0.7), (11, 0.69), (8, 0.68), (16, 0.68), (15, 0.67), (22, 0.67), (20, 0.65), (3, 0.62)], 0.05),
    (MeasureKind.OUTDEGREE_CENTRALITY,
     [(14, 0.7), (8, 0.69), (10, 0.69), (13, 0.69), (15, 0.69), (22, 0.69), (23, 0.69), (3, 0.68)], 0.03),
    (MeasureKind.OUTDEGREE_CENTRALITY,
     [(14, 0.7), (8, 0.69), (10, 0.69), (13, 0.69), (15, 0.69), (22, 0.69), (23, 0.69), (3, 0.68)], 0.03),
    (MeasureKind.EXPOSURE,
     [(11, 0.7), (13, 0.7), (17, 0.68), (12, 0.67), (2, 0.66), (19, 0.65), (20, 0.64), (21, 0.64)], 0.03),
    (MeasureKind.AGGREGATE_MEASURE,
     [(10, 0.7), (11, 0.66), (8, 0.65), (15, 0.64), (20, 0.53), (16, 0.5), (4, 0.48), (3, 0.47)], 0.03),
    (MeasureKind.PROPORTIONAL_FLOW,
     [(10, 0.7), (11, 0.69), (12, 0.68), (8, 0.67), (20, 0.66), (6, 0.65), (18, 0.64), (3, 0.63)], 0.03),
    (MeasureKind.TSALLIS_REDUNDANCY,
     [(10, 0.7), (11, 0.69), (8, 0.68), (4, 0.67), (15, 0.66), (3, 0.65), (6, 0.64), (12, 0.63)], 0.03),
    (MeasureKind.STAR_TSALLIS_REDUNDANCY,
     [(6, 0.7), (2, 0.68), (8, 0.66), (7, 0.64), (18, 0.62), (20, 0.6)], 0.03),
    (MeasureKind.GROUP_CENTRALITY,
     [(10, 0.7), (11, 0.6), (8, 0.6), (16, 0.6), (15, 0.6), (22, 0.6), (20, 0.6), (3, 0.5)], 0.03),
    (MeasureKind.AVERAGE_RATING,
     [(1, 0.7), (3, 0.68), (2, 0.66), (4, 0.64), (6, 0.62), (5, 0.6), (7, 0.4), (8, 0.35)], 0.02),
    (MeasureKind.AVERAGE_PATH_DISTANCE,
     [(1, 0.7), (3, 0.68), (2, 0.66), (4, 0.64), (6, 0.63), (5, 0.6), (7, 0.4), (8, 0.35)], 0.02),
    (MeasureKind.AVERAGE_PATH_DISTANCE_AFTER_DISRUPTION,
     [(24, 0.7), (23, 0.7), (22, 0.7), (21, 0.7), (20, 0.7), (19, 0.7), (18, 0.7), (17, 0.7)], 0.02),
    (MeasureKind.WEIGHTED_NODE,
     [(10, 0.7), (11, 0.68), (8, 0.66), (4, 0.64), (15, 0.64), (3, 0.62), (6, 0.6), (12, 0.58)], 0.02),
    (MeasureKind.WEIGHTED_NODE_AFTER_DISRUPTION,
     [(12, 0.7), (20, 0.68), (16, 0.66), (17, 0.64), (18, 0.62), (8, 0.6), (11, 0.58), (24, 0.56)], 0.02),
    (MeasureKind.UNDELIVERED_DEMAND_AFTER_DISRUPTION,
     [(1, 0.7), (2, 0.7), (3, 0.7), (6, 0.7), (4, 0.7), (12, 0.7), (5, 0.7), (11, 0.7)], 0.02),
    (MeasureKind.PATH_DISTANCE_CHANGE,
     [(1, 0.7), (2, 0.68), (3, 0.66), (6, 0.64), (4, 0.64), (12, 0.6), (5, 0.4), (11, 0.35)], 0.01),
    (MeasureKind.SEGMENTWISE,
     [(21, 0.7), (20, 0.68), (22, 0.66), (19, 0.64), (23, 0.62), (24, 0.6), (13, 0.58), (14, 0.56)], 0.01),
    (MeasureKind.COMPLEXITY_MEASURE_TSALLIS,
     [(8, 0.7), (4, 0.69), (15, 0.68), (3, 0.67), (6, 0.66), (12, 0.65), (9, 0.64), (20, 0.63)], 0.01),
    (MeasureKind.COMPLEXITY_MEASURE_DISTRIBUTION,
     [(11, 0.7), (8, 0.69), (4, 0.68), (15, 0.67), (3, 0.66), (6, 0.65), (12, 0.64), (9, 0.63)], 0.01),
]


def builtin_catalog(gamma: float = DEFAULT_GAMMA) -> ScenarioSet:
    """The 27 Sioux Falls scenarios. ``xi_11`` repeats ``xi_10`` and is flagged."""
    out = []
    for k, (measure, rates, prob) in enumerate(_CATALOG, start=1):
        notes = "duplicate of xi_10" if k == 11 else ""
        out.append(Scenario(f"xi_{k}", measure, dict(rates), prob, gamma, {}, notes))
    return normalize_probabilities(ScenarioSet(out))


def generate_from_measures(
    measures: Sequence[MeasureVector],
    top_m: int,
    rate_schedule: Sequence[float],
    prob_weights: Mapping[Category, float] | None = None,
    gamma: float = DEFAULT_GAMMA,
) -> ScenarioSet:
    """One scenario per measure; its ``top_m`` ranked nodes get ``rate_schedule`` in order."""
    if not measures:
        raise ValueError("no measures given")
    if top_m < 1 or len(rate_schedule) < top_m:
        raise ValueError("rate_schedule must cover top_m nodes")
    if any(not 0.0 <= r <= 1.0 for r in rate_schedule):
        raise ValueError("rates must lie in [0, 1]")
    if any(a < b for a, b in zip(rate_schedule, rate_schedule[1:])):
        raise ValueError("rate_schedule must be nonincreasing")
    out = []
    for k, vec in enumerate(measures, start=1):
        ranked = rank_nodes(vec, top_m)
        weight = 1.0 if prob_weights is None else prob_weights.get(vec.kind.category, 0.0)
        affected = {node: rate_schedule[r] for r, (node, _) in enumerate(ranked)}
        out.append(Scenario(f"xi_{k}", vec.kind, affected, weight, gamma))
    return normalize_probabilities(ScenarioSet(out))
