"""Causal DAGs with typed variables.

A :class:`Dag` is immutable and validated on construction.  Nodes keep their
declaration order, which is used to break ties whenever several nodes share a
causal rank, so every query below is deterministic.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import (
    CycleError,
    DagError,
    DuplicateEdgeError,
    EmptyInterventionError,
    MissingTypeError,
    UnknownNodeError,
)

_KIND_ALIASES = {
    "cont": "cont",
    "continuous": "cont",
    "bin": "bin",
    "binary": "bin",
    "cat": "cat",
    "categorical": "cat",
}


@dataclass(frozen=True)
class VarType:
    """Measurement type of one variable.

    ``kind`` is ``"cont"``, ``"bin"`` or ``"cat"``; categorical variables also
    carry ``n_categories`` and hold integer codes ``0 .. n_categories - 1``.
    """

    kind: str
    n_categories: int | None = None

    def __post_init__(self):
        kind = _KIND_ALIASES.get(self.kind)
        if kind is None:
            raise DagError(f"unknown variable type {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "cat":
            if self.n_categories is None or int(self.n_categories) < 2:
                raise DagError("categorical variables need n_categories >= 2")
            object.__setattr__(self, "n_categories", int(self.n_categories))
        elif self.n_categories is not None:
            raise DagError(f"n_categories given for a {kind} variable")

    @classmethod
    def parse(cls, token) -> "VarType":
        """Accept ``"cont"``, ``"bin"``, ``{"cat": n}``, ``"cat:n"`` or a VarType."""
        if isinstance(token, VarType):
            return token
        if isinstance(token, Mapping):
            if set(token) != {"cat"}:
                raise DagError(f"bad variable type {dict(token)!r}")
            return cls("cat", token["cat"])
        if isinstance(token, str) and ":" in token:
            kind, n = token.split(":", 1)
            return cls(kind.strip(), int(n))
        if isinstance(token, str):
            return cls(token.strip().lower())
        raise DagError(f"bad variable type {token!r}")

    @property
    def width(self) -> int:
        """Number of design-matrix columns this variable expands to."""
        return self.n_categories if self.kind == "cat" else 1

    def to_json(self):
        return {"cat": self.n_categories} if self.kind == "cat" else self.kind


CONT = VarType("cont")
BIN = VarType("bin")


def cat(n_categories: int) -> VarType:
    return VarType("cat", n_categories)


@dataclass(frozen=True)
class CausalOrdering:
    """Longest-path depth of every node: roots get 1, children 1 + max parent rank."""

    rank: Mapping[str, int]
    order: tuple[str, ...]

    def __getitem__(self, node: str) -> int:
        return self.rank[node]


class Dag:
    """A directed acyclic graph over named, typed variables.

    Parameters
    ----------
    nodes : iterable of str
        Variable names in declaration order.
    edges : iterable of (parent, child)
    var_types : mapping
        One entry per node; values are anything :meth:`VarType.parse` accepts.
    """

    def __init__(self, nodes: Iterable[str], edges: Iterable, var_types: Mapping):
        self._nodes = tuple(nodes)
        self._edges = tuple((str(a), str(b)) for a, b in edges)
        self._types_raw = dict(var_types)
        validate(self)
        self._var_types = MappingProxyType(
            {n: VarType.parse(self._types_raw[n]) for n in self._nodes}
        )
        self._index = {n: i for i, n in enumerate(self._nodes)}
        parents = {n: [] for n in self._nodes}
        children = {n: [] for n in self._nodes}
        for a, b in self._edges:
            parents[b].append(a)
            children[a].append(b)
        rank = _depth_ranks(self._nodes, parents)
        key = lambda n: (rank[n], self._index[n])  # noqa: E731
        self._parents = {n: tuple(sorted(ps, key=key)) for n, ps in parents.items()}
        self._children = {n: tuple(sorted(cs, key=key)) for n, cs in children.items()}
        self._ordering = CausalOrdering(
            MappingProxyType(rank), tuple(sorted(self._nodes, key=key))
        )

    @classmethod
    def from_edges(cls, edges, var_types: Mapping, nodes=None) -> "Dag":
        """Build a Dag whose nodes default to the keys of ``var_types``."""
        if nodes is None:
            nodes = list(var_types)
        return cls(nodes, edges, var_types)

    @property
    def nodes(self) -> tuple[str, ...]:
        return self._nodes

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return self._edges

    @property
    def var_types(self) -> Mapping[str, VarType]:
        return self._var_types

    @property
    def ordering(self) -> CausalOrdering:
        return self._ordering

    @property
    def endogenous(self) -> list[str]:
        """Nodes with at least one parent, in causal order."""
        return [n for n in self._ordering.order if self._parents[n]]

    def _check(self, node):
        if node not in self._index:
            raise UnknownNodeError(f"unknown node {node!r}")

    def parents(self, node: str) -> tuple[str, ...]:
        self._check(node)
        return self._parents[node]

    def children(self, node: str) -> tuple[str, ...]:
        self._check(node)
        return self._children[node]

    def descendants(self, node: str) -> frozenset[str]:
        self._check(node)
        seen: set[str] = set()
        stack = list(self._children[node])
        while stack:
            n = stack.pop()
            if n not in seen:
                seen.add(n)
                stack.extend(self._children[n])
        return frozenset(seen)

    def update_set(self, intervention_nodes: Iterable[str]) -> list[str]:
        """Descendants of the intervened nodes, excluding them, in causal order."""
        targets = set(intervention_nodes)
        if not targets:
            raise EmptyInterventionError("at least one intervention variable is required")
        found: set[str] = set()
        for t in targets:
            found |= self.descendants(t)
        found -= targets
        return [n for n in self._ordering.order if n in found]

    def to_dict(self) -> dict:
        return {
            "nodes": list(self._nodes),
            "edges": [list(e) for e in self._edges],
            "var_types": {n: self._var_types[n].to_json() for n in self._nodes},
        }

    def __eq__(self, other):
        return isinstance(other, Dag) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((self._nodes, self._edges))

    def __repr__(self):
        edges = ", ".join(f"{a}->{b}" for a, b in self._edges)
        return f"Dag(nodes={list(self._nodes)}, edges=[{edges}])"


def _depth_ranks(nodes, parents) -> dict[str, int]:
    rank: dict[str, int] = {}
    for n in _kahn(nodes, parents):
        rank[n] = 1 + max((rank[p] for p in parents[n]), default=0)
    return rank


def _kahn(nodes, parents):
    indeg = {n: len(parents[n]) for n in nodes}
    children = {n: [] for n in nodes}
    for n in nodes:
        for p in parents[n]:
            children[p].append(n)
    ready = [n for n in nodes if indeg[n] == 0]
    out = []
    while ready:
        n = ready.pop(0)
        out.append(n)
        for c in children[n]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return out


def _find_cycle(nodes, edges):
    succ = {n: [] for n in nodes}
    for a, b in edges:
        succ[a].append(b)
    color = dict.fromkeys(nodes, 0)
    for root in nodes:
        if color[root]:
            continue
        path = [root]
        color[root] = 1
        iters = [iter(succ[root])]
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                color[path.pop()] = 2
                iters.pop()
            elif color[nxt] == 1:
                return path[path.index(nxt):] + [nxt]
            elif color[nxt] == 0:
                color[nxt] = 1
                path.append(nxt)
                iters.append(iter(succ[nxt]))
    return None


def validate(dag: Dag) -> None:
    """Raise unless every structural invariant of ``dag`` holds."""
    nodes = dag._nodes
    if len(set(nodes)) != len(nodes):
        dup = sorted({n for n in nodes if nodes.count(n) > 1})
        raise DagError(f"duplicate node names: {dup}")
    known = set(nodes)
    seen = set()
    for a, b in dag._edges:
        for end in (a, b):
            if end not in known:
                raise UnknownNodeError(f"edge {a}->{b} uses undeclared node {end!r}")
        if (a, b) in seen:
            raise DuplicateEdgeError(f"duplicate edge {a}->{b}")
        seen.add((a, b))
    cycle = _find_cycle(nodes, dag._edges)
    if cycle is not None:
        raise CycleError(cycle)
    types = dag._types_raw
    missing = [n for n in nodes if n not in types]
    if missing:
        raise MissingTypeError(f"no variable type for {missing}")
    extra = sorted(set(types) - known)
    if extra:
        raise UnknownNodeError(f"variable types given for undeclared nodes {extra}")
    for n in nodes:
        VarType.parse(types[n])


def topological_order(dag: Dag) -> CausalOrdering:
    return dag.ordering


def parents(dag: Dag, node: str) -> frozenset[str]:
    return frozenset(dag.parents(node))


def descendants(dag: Dag, node: str) -> frozenset[str]:
    return dag.descendants(node)


def update_set(dag: Dag, intervention_nodes: Iterable[str]) -> list[str]:
    return dag.update_set(intervention_nodes)


def dag_from_dict(obj: Mapping) -> Dag:
    """Parse the JSON object form ``{"nodes", "edges", "var_types"}``."""
    if not isinstance(obj, Mapping):
        raise DagError("DAG document must be a JSON object")
    unknown = set(obj) - {"nodes", "edges", "var_types"}
    if unknown:
        raise DagError(f"unknown keys in DAG document: {sorted(unknown)}")
    for key in ("nodes", "edges", "var_types"):
        if key not in obj:
            raise DagError(f"DAG document lacks {key!r}")
    nodes = obj["nodes"]
    if not isinstance(nodes, list) or not nodes:
        raise DagError("'nodes' must be a non-empty list")
    edges = []
    for e in obj["edges"]:
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise DagError(f"bad edge {e!r}; expected [parent, child]")
        edges.append(tuple(e))
    if not isinstance(obj["var_types"], Mapping):
        raise DagError("'var_types' must be an object")
    return Dag(nodes, edges, obj["var_types"])


def load_dag(path) -> Dag:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DagError(f"{path}: invalid JSON ({exc})") from None
    return dag_from_dict(obj)


def save_dag(dag: Dag, path) -> None:
    Path(path).write_text(json.dumps(dag.to_dict(), indent=2) + "\n", encoding="utf-8")
