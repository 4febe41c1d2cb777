"""Auto-templated attack trees and per-campaign security indices.

A template spans the whole knowledge snapshot: a SAND root over one gate
per tactic, technique nodes below, subtechnique leaves at the bottom.
The difficulty level decides the gate types, which makes the index an
optimistic (EASY), moderate (DEFAULT), or pessimistic (HARD) reading of
the same campaign data.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import UndefinedIndexError
from .metrics import neg_log
from .snapshot import KnowledgeSnapshot, ProbMatrix, likelihoods, normalize_usage
from .tree import AttackTree, GateType, Node

ROOT_ID = "campaign"


class Difficulty(Enum):
    EASY = "easy"
    DEFAULT = "default"
    HARD = "hard"


@dataclass(frozen=True)
class TemplateTree:
    tree: AttackTree
    difficulty: Difficulty


def leaf_node_id(tech_id: str, tactic_id: str) -> str:
    """Deterministic template node id for a technique under a tactic."""
    return f"{tech_id}@{tactic_id}"


def _tactic_children(snapshot: KnowledgeSnapshot, tactic_id: str) -> list[str]:
    """Parent techniques shown under a tactic.

    A parent belongs to the tactic when it, or any of its subtechniques,
    carries the tag; that way every leaf usage normalization can produce
    has a home in the template.
    """
    out = []
    for tech in snapshot.techniques.values():
        if tech.parent is not None:
            continue
        tagged = tactic_id in tech.tactics or any(
            tactic_id in snapshot.technique(s).tactics
            for s in snapshot.subtechniques_of(tech.id)
        )
        if tagged:
            out.append(tech.id)
    return sorted(out)


def build_template(snapshot: KnowledgeSnapshot, difficulty: Difficulty) -> TemplateTree:
    """Template over every tactic and technique in the snapshot.

    Gate types by difficulty: HARD is all-AND below the root, EASY is
    all-OR below the root, DEFAULT keeps the tactic level sequential and
    refines techniques with OR.  Tactics with no techniques are omitted
    (a childless gate would be invalid).
    """
    if difficulty is Difficulty.HARD:
        tactic_gate, technique_gate = GateType.AND, GateType.AND
    elif difficulty is Difficulty.EASY:
        tactic_gate, technique_gate = GateType.OR, GateType.OR
    else:
        tactic_gate, technique_gate = GateType.SAND, GateType.OR

    nodes: list[Node] = []
    tactic_ids: list[str] = []
    for tactic in snapshot.tactics:
        children = _tactic_children(snapshot, tactic.id)
        if not children:
            continue
        tactic_ids.append(tactic.id)
        tech_nodes: list[str] = []
        for tech_id in children:
            nid = leaf_node_id(tech_id, tactic.id)
            tech_nodes.append(nid)
            subs = snapshot.subtechniques_of(tech_id)
            if subs:
                sub_ids = tuple(leaf_node_id(s, tactic.id) for s in subs)
                nodes.append(
                    Node(nid, technique_gate, sub_ids,
                         snapshot.technique(tech_id).name, tactic.id, tech_id)
                )
                for sub, sid in zip(subs, sub_ids):
                    nodes.append(
                        Node(sid, GateType.BAS, (),
                             snapshot.technique(sub).name, tactic.id, sub)
                    )
            else:
                nodes.append(
                    Node(nid, GateType.BAS, (),
                         snapshot.technique(tech_id).name, tactic.id, tech_id)
                )
        nodes.append(Node(tactic.id, tactic_gate, tuple(tech_nodes), tactic.name, tactic.id))
    nodes.append(Node(ROOT_ID, GateType.SAND, tuple(tactic_ids), "Campaign"))
    return TemplateTree(AttackTree(nodes, ROOT_ID), difficulty)


def used_pairs(snapshot: KnowledgeSnapshot, campaign_id: str) -> frozenset[tuple[str, str]]:
    """All (technique, tactic) leaf pairs a campaign used."""
    pairs = set()
    for tactic in snapshot.tactics:
        for leaf in normalize_usage(snapshot, campaign_id, tactic.id):
            pairs.add((leaf, tactic.id))
    return frozenset(pairs)


def campaign_index(
    snapshot: KnowledgeSnapshot,
    campaign_id: str,
    difficulty: Difficulty = Difficulty.DEFAULT,
    probs: ProbMatrix | None = None,
    template: TemplateTree | None = None,
) -> float:
    """Security index of one campaign on the difficulty's template.

    Single recursive pass: used leaves contribute -ln p, a subtree whose
    leaves the campaign never used contributes nothing to its parent
    (equivalently, the parent's neutral element), OR takes the minimum of
    the present child values, AND/SAND their sum.  Equals pruning the
    template to the used leaves and evaluating the security index there.
    """
    snapshot.campaign(campaign_id)
    if probs is None:
        probs = likelihoods(snapshot)
    if template is None:
        template = build_template(snapshot, difficulty)
    used = used_pairs(snapshot, campaign_id)
    tree = template.tree

    def absent_or_value(nid: str) -> float | None:
        node = tree.nodes[nid]
        if node.type is GateType.BAS:
            if (node.technique, node.tactic) not in used:
                return None
            return neg_log(probs.prob_float(node.technique, node.tactic))
        present = [v for v in (absent_or_value(c) for c in node.children) if v is not None]
        if not present:
            return None
        if node.type is GateType.OR:
            return min(present)
        # Plain left-fold add, bit-identical with the semiring fold used
        # by the prune-then-evaluate path.
        return sum(present)

    value = absent_or_value(tree.root)
    if value is None:
        raise UndefinedIndexError(
            f"campaign {campaign_id!r} has no recorded usage; index undefined"
        )
    return value


def security_range(
    snapshot: KnowledgeSnapshot,
    campaign_id: str,
    probs: ProbMatrix | None = None,
) -> tuple[float, float]:
    """(EASY, HARD) index pair bounding every difficulty in between."""
    if probs is None:
        probs = likelihoods(snapshot)
    return (
        campaign_index(snapshot, campaign_id, Difficulty.EASY, probs),
        campaign_index(snapshot, campaign_id, Difficulty.HARD, probs),
    )


def compare_all(
    snapshot: KnowledgeSnapshot,
    difficulty: Difficulty = Difficulty.DEFAULT,
    probs: ProbMatrix | None = None,
) -> list[tuple[str, float | None]]:
    """Index per campaign, ascending; undefined (no usage) sorted last by id."""
    if probs is None:
        probs = likelihoods(snapshot)
    template = build_template(snapshot, difficulty)
    defined: list[tuple[str, float]] = []
    undefined: list[str] = []
    for campaign_id in snapshot.campaigns:
        try:
            index = campaign_index(snapshot, campaign_id, difficulty, probs, template)
        except UndefinedIndexError:
            undefined.append(campaign_id)
            continue
        defined.append((campaign_id, index))
    defined.sort(key=lambda kv: (kv[1], kv[0]))
    result: list[tuple[str, float | None]] = list(defined)
    result.extend((cid, None) for cid in sorted(undefined))
    return result


def instantiate(
    snapshot: KnowledgeSnapshot,
    campaign_id: str,
    difficulty: Difficulty = Difficulty.DEFAULT,
    probs: ProbMatrix | None = None,
) -> tuple[AttackTree, dict[str, float]]:
    """Pruned template for one campaign plus its leaf probabilities."""
    if probs is None:
        probs = likelihoods(snapshot)
    template = build_template(snapshot, difficulty)
    used = used_pairs(snapshot, campaign_id)
    live = {leaf_node_id(tech, tactic) for tech, tactic in used}
    pruned = template.tree.prune(live)
    attribution = {
        leaf_node_id(tech, tactic): probs.prob_float(tech, tactic)
        for tech, tactic in used
    }
    return pruned, attribution
