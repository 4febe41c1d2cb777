"""Attack tree core: a rooted DAG of gates over basic attack steps.

Nodes are OR/AND/SAND gates or BAS leaves.  A node is a BAS exactly when
it has no children.  Children may be shared between gates (DAG shape);
SAND children are ordered, which the model preserves but the untimed
semantics here does not otherwise exploit.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import InvariantError, UnknownEntityError


class GateType(Enum):
    OR = "OR"
    AND = "AND"
    SAND = "SAND"
    BAS = "BAS"


@dataclass(frozen=True)
class Node:
    """One attack tree node; gates carry children, leaves carry tags.

    ``tactic`` and ``technique`` are optional knowledge-base tags used by
    template instantiation and leaf attribution; plain hand-built trees
    leave them unset.
    """

    id: str
    type: GateType
    children: tuple[str, ...] = ()
    label: str | None = None
    tactic: str | None = None
    technique: str | None = None


# An attack is a set of BAS ids.
Attack = frozenset[str]


def _minimize(families: Iterable[int]) -> list[int]:
    """Keep only subset-minimal bitmasks (antichain under inclusion)."""
    ordered = sorted(set(families), key=lambda m: (bin(m).count("1"), m))
    kept: list[int] = []
    for mask in ordered:
        if not any(k & mask == k for k in kept):
            kept.append(mask)
    return kept


class AttackTree:
    """Immutable rooted DAG of OR/AND/SAND gates over BAS leaves.

    Construction tolerates structurally broken input (dangling children,
    cycles, childless gates) so that :meth:`validate` can report every
    violation; the analysis operations refuse to run until the tree is
    valid.
    """

    def __init__(self, nodes: Iterable[Node], root: str):
        self._nodes: dict[str, Node] = {}
        for node in nodes:
            if not node.id:
                raise InvariantError("empty node id")
            if node.id in self._nodes:
                raise InvariantError(f"duplicate node id {node.id!r}")
            self._nodes[node.id] = node
        self.root = root
        self._violations: list[str] | None = None
        self._parents: dict[str, tuple[str, ...]] | None = None
        self._cut_bits: dict[str, list[int]] = {}
        self._bas_order: list[str] | None = None

    # -- basic accessors ------------------------------------------------

    @property
    def nodes(self) -> Mapping[str, Node]:
        return MappingProxyType(self._nodes)

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownEntityError(f"unknown node {node_id!r}") from None

    @property
    def bas_ids(self) -> frozenset[str]:
        return frozenset(n.id for n in self._nodes.values() if n.type is GateType.BAS)

    @property
    def parents(self) -> Mapping[str, tuple[str, ...]]:
        if self._parents is None:
            acc: dict[str, list[str]] = {nid: [] for nid in self._nodes}
            for node in self._nodes.values():
                for child in node.children:
                    if child in acc:
                        acc[child].append(node.id)
            self._parents = {nid: tuple(ps) for nid, ps in acc.items()}
        return self._parents

    @property
    def is_tree_structured(self) -> bool:
        return all(len(ps) <= 1 for ps in self.parents.values())

    # -- validation -----------------------------------------------------

    def validate(self) -> list[str]:
        """Return every violated structural invariant; empty means valid."""
        if self._violations is not None:
            return list(self._violations)
        out: list[str] = []
        if self.root not in self._nodes:
            out.append(f"root {self.root!r} is not among the nodes")
        for node in self._nodes.values():
            if node.type is GateType.BAS and node.children:
                out.append(f"BAS {node.id!r} has children")
            if node.type is not GateType.BAS and not node.children:
                out.append(f"gate {node.id!r} has no children")
            for child in node.children:
                if child not in self._nodes:
                    out.append(f"node {node.id!r} references missing child {child!r}")
        for nid, ps in self.parents.items():
            if nid == self.root:
                if ps:
                    out.append(f"root {self.root!r} has incoming edges")
            elif not ps:
                out.append(f"multiple roots: {nid!r} has no parent")
        out.extend(self._find_cycles())
        self._violations = out
        return list(out)

    def _find_cycles(self) -> list[str]:
        # Iterative DFS with colors; reports each back edge once.
        WHITE, GREY, BLACK = 0, 1, 2
        color = {nid: WHITE for nid in self._nodes}
        found: list[str] = []
        for start in self._nodes:
            if color[start] != WHITE:
                continue
            stack: list[tuple[str, int]] = [(start, 0)]
            color[start] = GREY
            while stack:
                nid, idx = stack[-1]
                children = self._nodes[nid].children
                if idx < len(children):
                    stack[-1] = (nid, idx + 1)
                    child = children[idx]
                    if child not in self._nodes:
                        continue
                    if color[child] == GREY:
                        found.append(f"cycle through {child!r}")
                    elif color[child] == WHITE:
                        color[child] = GREY
                        stack.append((child, 0))
                else:
                    color[nid] = BLACK
                    stack.pop()
        return found

    def require_valid(self) -> None:
        violations = self.validate()
        if violations:
            raise InvariantError("invalid attack tree: " + "; ".join(violations))

    # -- semantics ------------------------------------------------------

    def _as_attack(self, attack: Iterable[str]) -> Attack:
        steps = frozenset(attack)
        for step in steps:
            node = self._nodes.get(step)
            if node is None:
                raise UnknownEntityError(f"unknown attack step {step!r}")
            if node.type is not GateType.BAS:
                raise InvariantError(f"attack step {step!r} is not a BAS")
        return steps

    def structure_function(self, node_id: str, attack: Iterable[str]) -> bool:
        """Whether the given set of succeeded BASes compromises ``node_id``."""
        self.require_valid()
        self.node(node_id)
        steps = self._as_attack(attack)
        memo: dict[str, bool] = {}

        def f(nid: str) -> bool:
            if nid in memo:
                return memo[nid]
            node = self._nodes[nid]
            if node.type is GateType.BAS:
                result = nid in steps
            elif node.type is GateType.OR:
                result = any(f(c) for c in node.children)
            else:
                result = all(f(c) for c in node.children)
            memo[nid] = result
            return result

        return f(node_id)

    def descendants(self, node_id: str) -> frozenset[str]:
        """Strict descendants of a node (the node itself excluded)."""
        self.require_valid()
        self.node(node_id)
        seen: set[str] = set()
        stack = list(self._nodes[node_id].children)
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            stack.extend(self._nodes[nid].children)
        return frozenset(seen)

    def _bas_index(self) -> dict[str, int]:
        if self._bas_order is None:
            self._bas_order = sorted(self.bas_ids)
        return {b: i for i, b in enumerate(self._bas_order)}

    def minimal_attacks(self, node_id: str | None = None) -> frozenset[Attack]:
        """Subset-minimal attacks compromising the node (default: root).

        Computed bottom-up over the node's descendant cone with
        subsumption elimination at every gate, so shared subtrees in DAGs
        cannot smuggle non-minimal products into the result.
        """
        self.require_valid()
        target = self.root if node_id is None else node_id
        self.node(target)
        index = self._bas_index()
        order = self._bas_order or []

        def cuts(nid: str) -> list[int]:
            cached = self._cut_bits.get(nid)
            if cached is not None:
                return cached
            node = self._nodes[nid]
            if node.type is GateType.BAS:
                result = [1 << index[nid]]
            elif node.type is GateType.OR:
                acc: list[int] = []
                for child in node.children:
                    acc.extend(cuts(child))
                result = _minimize(acc)
            else:
                result = [0]
                for child in node.children:
                    child_cuts = cuts(child)
                    result = _minimize([a | b for a in result for b in child_cuts])
            self._cut_bits[nid] = result
            return result

        return frozenset(
            frozenset(order[i] for i in range(mask.bit_length()) if mask >> i & 1)
            for mask in cuts(target)
        )

    def is_module(self, node_id: str) -> bool:
        """Whether every path between the node's cone and the rest runs through it."""
        self.require_valid()
        self.node(node_id)
        cone = self.descendants(node_id)
        parents = self.parents
        return all(p == node_id or p in cone for d in cone for p in parents[d])

    def prune(self, live: Iterable[str]) -> "AttackTree":
        """Restrict to the given live BASes, dropping gates left childless.

        Child order (SAND sequencing) is preserved.  Pruning away the
        whole tree is an error: an empty campaign has no model.
        """
        self.require_valid()
        live_set = frozenset(live)
        bas = self.bas_ids
        for step in live_set:
            if step not in self._nodes:
                raise UnknownEntityError(f"unknown leaf {step!r}")
            if step not in bas:
                raise InvariantError(f"cannot keep {step!r}: not a BAS")
        memo: dict[str, bool] = {}

        def kept(nid: str) -> bool:
            if nid in memo:
                return memo[nid]
            node = self._nodes[nid]
            if node.type is GateType.BAS:
                result = nid in live_set
            else:
                result = any(kept(c) for c in node.children)
            memo[nid] = result
            return result

        if not kept(self.root):
            raise InvariantError("empty campaign: pruning would remove the root")
        # Every kept node stays connected: its ancestors are kept too.
        new_nodes = []
        for node in self._nodes.values():
            if not kept(node.id):
                continue
            if node.type is GateType.BAS:
                new_nodes.append(node)
            else:
                children = tuple(c for c in node.children if kept(c))
                new_nodes.append(
                    Node(node.id, node.type, children, node.label, node.tactic, node.technique)
                )
        return AttackTree(new_nodes, self.root)
