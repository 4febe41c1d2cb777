"""Semiring attribute domains and metric evaluation over attack trees.

A load is a linearly ordered unital semiring (V, nabla, delta): nabla
picks between alternative attacks, delta accumulates within one attack.
Both operations are commutative and associative, delta distributes over
nabla, nabla absorbs (x nabla (x delta y) = x), and the units satisfy
unit_nabla delta x = unit_nabla and unit_delta delta x = x.  Those laws
are what make the bottom-up tree pass agree with the definition over
minimal attacks on tree-structured trees.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .errors import InvariantError, MissingAttributionError, UnknownEntityError
from .tree import AttackTree, GateType

Interval = tuple[float, float]


@dataclass(frozen=True)
class Load:
    """One attribute domain; ``domain`` is the closed value range."""

    name: str
    nabla: Callable[[float, float], float]
    delta: Callable[[float, float], float]
    unit_nabla: float
    unit_delta: float
    domain: Interval

    def fold_nabla(self, values: Iterable[float]) -> float:
        acc = self.unit_nabla
        for v in values:
            acc = self.nabla(acc, v)
        return acc

    def fold_delta(self, values: Iterable[float]) -> float:
        acc = self.unit_delta
        for v in values:
            acc = self.delta(acc, v)
        return acc

    def check_value(self, value: float, where: str) -> float:
        lo, hi = self.domain
        if not (lo <= value <= hi):
            raise InvariantError(
                f"{where}: value {value!r} outside the {self.name} domain [{lo}, {hi}]"
            )
        return value


MIN_COST = Load("mincost", min, operator.add, math.inf, 0.0, (0.0, math.inf))
MIN_TIME_SEQ = Load("mintime-seq", min, operator.add, math.inf, 0.0, (0.0, math.inf))
MIN_TIME_PAR = Load("mintime-par", min, max, math.inf, 0.0, (0.0, math.inf))
MIN_SKILL = Load("minskill", min, max, math.inf, 0.0, (0.0, math.inf))
MAX_PROB = Load("maxprob", max, operator.mul, 0.0, 1.0, (0.0, 1.0))
SECURITY_INDEX = Load("security-index", min, operator.add, math.inf, 0.0, (0.0, math.inf))

BUILTIN_LOADS: dict[str, Load] = {
    load.name: load
    for load in (MIN_COST, MIN_TIME_SEQ, MIN_TIME_PAR, MIN_SKILL, MAX_PROB, SECURITY_INDEX)
}


def get_load(name: str) -> Load:
    try:
        return BUILTIN_LOADS[name]
    except KeyError:
        raise UnknownEntityError(f"unknown load {name!r}") from None


def _value(attr: Mapping[str, float], step: str, load: Load) -> float:
    try:
        value = attr[step]
    except KeyError:
        raise MissingAttributionError(
            f"no {load.name} attribution for leaf {step!r}"
        ) from None
    return load.check_value(value, f"leaf {step!r}")


def attack_metric(load: Load, attr: Mapping[str, float], attack: Iterable[str]) -> float:
    """delta-fold of the leaf values over one attack."""
    return load.fold_delta(_value(attr, step, load) for step in sorted(set(attack)))


def tree_metric(
    load: Load,
    attr: Mapping[str, float],
    tree: AttackTree,
    node_id: str | None = None,
    method: str = "auto",
) -> float:
    """nabla over the node's minimal attacks of their delta-folds.

    ``method`` selects the computation: "definitional" enumerates minimal
    attacks (always correct, exponential worst case), "bottom-up" is the
    linear-time pass that is only sound on tree-structured trees, "auto"
    picks bottom-up exactly when the tree is tree-structured.
    """
    tree.require_valid()
    target = tree.root if node_id is None else node_id
    tree.node(target)
    if method == "auto":
        method = "bottom-up" if tree.is_tree_structured else "definitional"
    if method == "definitional":
        cuts = tree.minimal_attacks(target)
        folded = (
            attack_metric(load, attr, cut)
            for cut in sorted(cuts, key=lambda c: (len(c), sorted(c)))
        )
        return load.fold_nabla(folded)
    if method != "bottom-up":
        raise ValueError(f"unknown method {method!r}")
    if not tree.is_tree_structured:
        raise InvariantError("bottom-up pass is unsound on DAG-structured trees")
    memo: dict[str, float] = {}

    def up(nid: str) -> float:
        if nid in memo:
            return memo[nid]
        node = tree.nodes[nid]
        if node.type is GateType.BAS:
            result = _value(attr, nid, load)
        elif node.type is GateType.OR:
            result = load.fold_nabla(up(c) for c in node.children)
        else:
            result = load.fold_delta(up(c) for c in node.children)
        memo[nid] = result
        return result

    return up(target)


def _split(iattr: Mapping[str, Interval]) -> tuple[dict[str, float], dict[str, float]]:
    lows: dict[str, float] = {}
    highs: dict[str, float] = {}
    for step, (lo, hi) in iattr.items():
        if lo > hi:
            raise InvariantError(f"leaf {step!r}: interval bounds out of order [{lo}, {hi}]")
        lows[step] = lo
        highs[step] = hi
    return lows, highs


def interval_attack_metric(
    load: Load, iattr: Mapping[str, Interval], attack: Iterable[str]
) -> Interval:
    """Endpoint delta-folds over one attack; delta is monotone for every built-in."""
    lows, highs = _split(iattr)
    return (
        attack_metric(load, lows, attack),
        attack_metric(load, highs, attack),
    )


def interval_tree_metric(
    load: Load,
    iattr: Mapping[str, Interval],
    tree: AttackTree,
    node_id: str | None = None,
    method: str = "auto",
) -> Interval:
    """Metric bounds under interval attributions, by endpoint evaluation.

    Every built-in load is monotone in each leaf value, so the metric over
    all feasible point attributions spans exactly the interval between the
    all-lower-bounds and all-upper-bounds evaluations.
    """
    lows, highs = _split(iattr)
    return (
        tree_metric(load, lows, tree, node_id, method),
        tree_metric(load, highs, tree, node_id, method),
    )


def neg_log(p: float) -> float:
    """-ln p, with p = 0 mapped to infinity (and p = 1 to plain +0.0)."""
    if not 0.0 <= p <= 1.0:
        raise InvariantError(f"probability {p!r} outside [0, 1]")
    return math.inf if p == 0.0 else -math.log(p) + 0.0


def security_index(
    tree: AttackTree,
    prob_attr: Mapping[str, float],
    node_id: str | None = None,
    method: str = "auto",
) -> float:
    """-ln of the max-probability metric, computed in the log domain.

    Working with (min, +) over -ln p avoids product underflow on big
    trees; the two readings agree because -ln is a monotone isomorphism
    between ([0,1], max, *) and ([0,inf], min, +).
    """
    beta = {step: neg_log(p) for step, p in prob_attr.items()}
    return tree_metric(SECURITY_INDEX, beta, tree, node_id, method)
