"""Directed network model, TNTP / demand-CSV ingestion and the Sioux Falls fixture."""

from __future__ import annotations

import csv
import io
import json
from collections import deque
from dataclasses import dataclass
from importlib import resources
from types import MappingProxyType
from typing import Iterable, Mapping

TNTP_COLUMNS = (
    "init_node",
    "term_node",
    "capacity",
    "length",
    "free_flow_time",
    "b",
    "power",
    "speed",
    "toll",
    "link_type",
)

DEFAULT_DEMAND_SCALE = 100.0


class TntpParseError(ValueError):
    """Malformed TNTP content; ``lineno`` is 1-based."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class NetworkValidationError(ValueError):
    pass


@dataclass(frozen=True)
class Link:
    id: int
    tail: int
    head: int
    free_flow_time: float
    capacity: float
    length: float = 0.0
    b: float = 0.15
    power: float = 4.0
    speed: float = 0.0
    toll: float = 0.0
    link_type: int = 1

    def __post_init__(self):
        if self.tail == self.head:
            raise NetworkValidationError(f"link {self.id}: tail equals head ({self.tail})")
        if not self.capacity > 0:
            raise NetworkValidationError(f"link {self.id}: capacity must be positive")
        if self.free_flow_time < 0:
            raise NetworkValidationError(f"link {self.id}: negative free-flow time")


class Network:
    """Immutable directed graph keyed by external (1-based) node ids.

    Links keep their file order; ``incident_links(i)`` is the set of links
    with ``i`` as tail or head.
    """

    def __init__(self, nodes: Iterable[int], links: Iterable[Link]):
        self._nodes = tuple(sorted(set(nodes)))
        self._links = tuple(links)
        node_set = set(self._nodes)
        ids = [l.id for l in self._links]
        if len(set(ids)) != len(ids):
            raise NetworkValidationError("duplicate link ids")
        out: dict[int, list[int]] = {i: [] for i in self._nodes}
        inc: dict[int, list[int]] = {i: [] for i in self._nodes}
        for l in self._links:
            for end in (l.tail, l.head):
                if end not in node_set:
                    raise NetworkValidationError(f"link {l.id} references unknown node {end}")
            out[l.tail].append(l.id)
            inc[l.head].append(l.id)
        self._by_id = MappingProxyType({l.id: l for l in self._links})
        self._out = MappingProxyType({i: tuple(v) for i, v in out.items()})
        self._in = MappingProxyType({i: tuple(v) for i, v in inc.items()})
        self._arc = MappingProxyType({(l.tail, l.head): l.id for l in reversed(self._links)})

    @property
    def nodes(self) -> tuple[int, ...]:
        return self._nodes

    @property
    def links(self) -> tuple[Link, ...]:
        return self._links

    def link(self, link_id: int) -> Link:
        return self._by_id[link_id]

    def out_links(self, node: int) -> tuple[int, ...]:
        return self._out[node]

    def in_links(self, node: int) -> tuple[int, ...]:
        return self._in[node]

    def incident_links(self, node: int) -> frozenset[int]:
        return frozenset(self._out[node]) | frozenset(self._in[node])

    def link_between(self, tail: int, head: int) -> int | None:
        """Id of the first link ``tail -> head`` in file order, if any."""
        return self._arc.get((tail, head))

    def successors(self, node: int) -> list[int]:
        return [self._by_id[l].head for l in self._out[node]]

    def without_nodes(self, removed: Iterable[int]) -> "Network":
        gone = set(removed)
        return Network(
            [i for i in self._nodes if i not in gone],
            [l for l in self._links if l.tail not in gone and l.head not in gone],
        )

    def __len__(self):
        return len(self._nodes)

    def __contains__(self, node):
        return node in self._out

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self._nodes == other._nodes and self._links == other._links

    def __hash__(self):
        return hash((self._nodes, self._links))

    def __repr__(self):
        return f"Network(nodes={len(self._nodes)}, links={len(self._links)})"


def parse_tntp(net_text: str) -> Network:
    """Parse a TNTP ``*_net.tntp`` file.

    The column order is taken from the ``~ init_node term_node ...`` header
    comment when present, otherwise the standard ten-column layout is assumed.
    """
    meta: dict[str, str] = {}
    columns = list(TNTP_COLUMNS)
    links: list[Link] = []
    for lineno, raw in enumerate(net_text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("~"):
            words = line[1:].replace(";", " ").split()
            if "init_node" in words and "term_node" in words:
                columns = [w.lower() for w in words]
            continue
        if line.startswith("<"):
            if ">" not in line:
                raise TntpParseError(lineno, "unterminated metadata tag")
            key, value = line[1:].split(">", 1)
            key = key.strip().upper()
            if key != "END OF METADATA":
                meta[key] = value.strip()
            continue
        row = line.rstrip(";").split()
        if len(row) < 5:
            raise TntpParseError(lineno, f"expected at least 5 fields, got {len(row)}")
        try:
            rec = {name: float(tok) for name, tok in zip(columns, row)}
        except ValueError as exc:
            raise TntpParseError(lineno, str(exc)) from None
        missing = [c for c in ("init_node", "term_node", "capacity", "free_flow_time") if c not in rec]
        if missing:
            raise TntpParseError(lineno, f"missing columns {missing}")
        try:
            links.append(
                Link(
                    id=len(links) + 1,
                    tail=int(rec["init_node"]),
                    head=int(rec["term_node"]),
                    free_flow_time=rec["free_flow_time"],
                    capacity=rec["capacity"],
                    length=rec.get("length", 0.0),
                    b=rec.get("b", 0.15),
                    power=rec.get("power", 4.0),
                    speed=rec.get("speed", 0.0),
                    toll=rec.get("toll", 0.0),
                    link_type=int(rec.get("link_type", 1)),
                )
            )
        except NetworkValidationError as exc:
            raise TntpParseError(lineno, str(exc)) from None

    endpoints = {l.tail for l in links} | {l.head for l in links}
    if "NUMBER OF NODES" in meta:
        n = int(meta["NUMBER OF NODES"])
        nodes = set(range(1, n + 1))
        stray = sorted(endpoints - nodes)
        if stray:
            raise NetworkValidationError(
                f"<NUMBER OF NODES> is {n} but links reference nodes {stray}"
            )
    else:
        nodes = endpoints
    if "NUMBER OF LINKS" in meta and int(meta["NUMBER OF LINKS"]) != len(links):
        raise NetworkValidationError(
            f"<NUMBER OF LINKS> is {meta['NUMBER OF LINKS']} but {len(links)} rows were read"
        )
    return Network(nodes, links)


def _fmt(x: float) -> str:
    return repr(float(x)) if x != int(x) else str(int(x))


def serialize_tntp(network: Network) -> str:
    n = len(network.nodes)
    lines = [
        f"<NUMBER OF ZONES> {n}",
        f"<NUMBER OF NODES> {max(network.nodes, default=0)}",
        "<FIRST THRU NODE> 1",
        f"<NUMBER OF LINKS> {len(network.links)}",
        "<END OF METADATA>",
        "",
        "~\t" + "\t".join(TNTP_COLUMNS) + "\t;",
    ]
    for l in network.links:
        vals = (l.tail, l.head, l.capacity, l.length, l.free_flow_time, l.b, l.power, l.speed, l.toll, l.link_type)
        lines.append("\t" + "\t".join(_fmt(v) for v in vals) + "\t;")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DemandTable:
    """OD demand; ``demand(o, d)`` is the raw table value times ``scale_multiplier``."""

    entries: Mapping[tuple[int, int], float]
    scale_multiplier: float = DEFAULT_DEMAND_SCALE

    def __post_init__(self):
        if not self.scale_multiplier > 0:
            raise ValueError("scale_multiplier must be positive")
        for pair, v in self.entries.items():
            if v < 0:
                raise ValueError(f"negative demand for {pair}")
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    def demand(self, origin: int, destination: int) -> float:
        return self.entries.get((origin, destination), 0.0) * self.scale_multiplier

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(self.entries)

    @property
    def origins(self) -> list[int]:
        return sorted({o for o, _ in self.entries})

    @property
    def destinations(self) -> list[int]:
        return sorted({d for _, d in self.entries})

    def total(self) -> float:
        return sum(self.entries.values()) * self.scale_multiplier

    def scaled(self, scale_multiplier: float) -> "DemandTable":
        return DemandTable(dict(self.entries), scale_multiplier)


def load_demand(csv_text: str, scale_multiplier: float = DEFAULT_DEMAND_SCALE) -> DemandTable:
    reader = csv.reader(io.StringIO(csv_text))
    header = next(reader, None)
    if header is None:
        raise ValueError("demand CSV is empty (a header line is required)")
    entries: dict[tuple[int, int], float] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or not "".join(row).strip():
            continue
        if len(row) != 3:
            raise ValueError(f"line {lineno}: expected origin,destination,demand")
        o, d, v = int(row[0]), int(row[1]), float(row[2])
        if (o, d) in entries:
            raise ValueError(f"line {lineno}: duplicate OD pair ({o}, {d})")
        if v < 0:
            raise ValueError(f"line {lineno}: negative demand {v}")
        entries[(o, d)] = v
    return DemandTable(entries, scale_multiplier)


def dump_demand(demand: DemandTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["origin", "destination", "demand"])
    for (o, d), v in demand.entries.items():
        w.writerow([o, d, _fmt(v)])
    return buf.getvalue()


@dataclass(frozen=True)
class Finding:
    severity: str
    message: str
    subject: object = None


def _reachable(network: Network, source: int) -> set[int]:
    seen = {source}
    queue = deque([source])
    while queue:
        i = queue.popleft()
        for j in network.successors(i):
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return seen


def validate(network: Network, demand: DemandTable) -> list[Finding]:
    """Check demand against the network; empty result means usable as-is."""
    findings = []
    nodes = set(network.nodes)
    reach: dict[int, set[int]] = {}
    for o, d in demand.pairs:
        bad = False
        if o not in nodes:
            findings.append(Finding("error", "unknown origin", (o, d)))
            bad = True
        if d not in nodes:
            findings.append(Finding("error", "unknown destination", (o, d)))
            bad = True
        if bad:
            continue
        if o not in reach:
            reach[o] = _reachable(network, o)
        if d not in reach[o]:
            findings.append(Finding("error", "OD pair disconnected", (o, d)))
    return findings


@dataclass(frozen=True)
class FortificationParams:
    cost: Mapping[int, float]
    budget: int

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError("budget must be nonnegative")
        if any(c < 0 for c in self.cost.values()):
            raise ValueError("fortification costs must be nonnegative")
        object.__setattr__(self, "cost", MappingProxyType(dict(self.cost)))

    def check(self, network: Network) -> None:
        missing = [i for i in network.nodes if i not in self.cost]
        if missing:
            raise ValueError(f"no fortification cost for nodes {missing}")
        if self.budget > len(network.nodes):
            raise ValueError("budget exceeds the number of nodes")

    @classmethod
    def uniform(cls, network: Network, budget: int, cost: float = 1.0) -> "FortificationParams":
        return cls({i: cost for i in network.nodes}, budget)

    @classmethod
    def from_json(cls, text: str) -> "FortificationParams":
        raw = json.loads(text)
        return cls({int(k): float(v) for k, v in raw["cost"].items()}, int(raw["budget"]))

    def to_json(self) -> str:
        return json.dumps({"cost": {str(k): v for k, v in self.cost.items()}, "budget": self.budget}, indent=1)

    def with_budget(self, budget: int) -> "FortificationParams":
        return FortificationParams(dict(self.cost), budget)


def _data_text(name: str) -> str:
    return resources.files("fortifynet.data").joinpath(name).read_text()


def sioux_falls() -> Network:
    """The 24-node / 76-link Sioux Falls road network."""
    return parse_tntp(_data_text("SiouxFalls_net.tntp"))


def sioux_falls_demand(scale_multiplier: float = DEFAULT_DEMAND_SCALE) -> DemandTable:
    """The 16 OD pairs between origins {1, 2, 3, 13} and destinations {6, 7, 18, 20}."""
    return load_demand(_data_text("SiouxFalls_demand.csv"), scale_multiplier)


def sioux_falls_fortification() -> FortificationParams:
    # Unit costs are not published for this case; they are placeholder data.
    return FortificationParams.from_json(_data_text("SiouxFalls_fortification.json"))
