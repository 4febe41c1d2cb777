"""Canonical knowledge snapshot: tactics, techniques, campaign usage.

The snapshot is a pinned, versioned view of a MITRE-style knowledge base.
Techniques form a two-level hierarchy (parents and subtechniques); each
campaign records a duplicate-free set of (tactic, technique) usage pairs.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, Mapping

from .errors import InvariantError, ParseError, UnknownEntityError

# MITRE Enterprise tactic short names in matrix order, used by the STIX
# importer to order tactics canonically.
ENTERPRISE_TACTIC_ORDER = (
    "reconnaissance",
    "resource-development",
    "initial-access",
    "execution",
    "persistence",
    "privilege-escalation",
    "defense-evasion",
    "credential-access",
    "discovery",
    "lateral-movement",
    "collection",
    "command-and-control",
    "exfiltration",
    "impact",
)


@dataclass(frozen=True)
class Tactic:
    id: str
    name: str


@dataclass(frozen=True)
class Technique:
    id: str
    name: str
    parent: str | None
    tactics: tuple[str, ...]


@dataclass(frozen=True)
class Campaign:
    id: str
    name: str
    uses: frozenset[tuple[str, str]]  # (tactic-id, technique-id)


class KnowledgeSnapshot:
    """Validated, immutable snapshot of one knowledge-base version."""

    def __init__(
        self,
        version: str,
        tactics: Iterable[Tactic],
        techniques: Iterable[Technique],
        campaigns: Iterable[Campaign],
    ):
        self.version = version
        self.tactics = tuple(tactics)
        self.techniques: dict[str, Technique] = {}
        self.campaigns: dict[str, Campaign] = {}
        seen_tactics: set[str] = set()
        for tactic in self.tactics:
            if tactic.id in seen_tactics:
                raise InvariantError(f"duplicate tactic id {tactic.id!r}")
            seen_tactics.add(tactic.id)
        for tech in techniques:
            if tech.id in self.techniques:
                raise InvariantError(f"duplicate technique id {tech.id!r}")
            self.techniques[tech.id] = tech
        for camp in campaigns:
            if camp.id in self.campaigns:
                raise InvariantError(f"duplicate campaign id {camp.id!r}")
            self.campaigns[camp.id] = camp
        self._subs: dict[str, tuple[str, ...]] = {}
        self._check()

    def _check(self) -> None:
        tactic_ids = {t.id for t in self.tactics}
        for tech in self.techniques.values():
            if tech.parent is not None:
                parent = self.techniques.get(tech.parent)
                if parent is None:
                    raise InvariantError(
                        f"technique {tech.id!r}: parent {tech.parent!r} is not declared"
                    )
                if parent.parent is not None:
                    raise InvariantError(
                        f"technique {tech.id!r}: parent {tech.parent!r} is itself a "
                        "subtechnique (hierarchy must be two-level)"
                    )
            for tid in tech.tactics:
                if tid not in tactic_ids:
                    raise InvariantError(
                        f"technique {tech.id!r}: undeclared tactic {tid!r}"
                    )
        subs: dict[str, list[str]] = {}
        for tech in self.techniques.values():
            if tech.parent is not None:
                subs.setdefault(tech.parent, []).append(tech.id)
        self._subs = {p: tuple(sorted(s)) for p, s in subs.items()}
        for camp in self.campaigns.values():
            for tactic_id, tech_id in camp.uses:
                if tactic_id not in tactic_ids:
                    raise InvariantError(
                        f"campaign {camp.id!r}: uses undeclared tactic {tactic_id!r}"
                    )
                tech = self.techniques.get(tech_id)
                if tech is None:
                    raise InvariantError(
                        f"campaign {camp.id!r}: uses undeclared technique {tech_id!r}"
                    )
                if tactic_id not in tech.tactics:
                    raise InvariantError(
                        f"campaign {camp.id!r}: technique {tech_id!r} is not tagged "
                        f"with tactic {tactic_id!r}"
                    )

    # -- hierarchy helpers ------------------------------------------------

    def subtechniques_of(self, tech_id: str) -> tuple[str, ...]:
        return self._subs.get(tech_id, ())

    def is_leaf_technique(self, tech_id: str) -> bool:
        """Leaf = subtechnique, or parent technique with no subtechniques."""
        tech = self.technique(tech_id)
        return tech.parent is not None or not self.subtechniques_of(tech_id)

    def technique(self, tech_id: str) -> Technique:
        try:
            return self.techniques[tech_id]
        except KeyError:
            raise UnknownEntityError(f"unknown technique {tech_id!r}") from None

    def tactic(self, tactic_id: str) -> Tactic:
        for tactic in self.tactics:
            if tactic.id == tactic_id:
                return tactic
        raise UnknownEntityError(f"unknown tactic {tactic_id!r}")

    def campaign(self, campaign_id: str) -> Campaign:
        try:
            return self.campaigns[campaign_id]
        except KeyError:
            raise UnknownEntityError(f"unknown campaign {campaign_id!r}") from None


# -- usage normalization ---------------------------------------------------


def normalize_usage(
    snapshot: KnowledgeSnapshot, campaign_id: str, tactic_id: str
) -> frozenset[str]:
    """Leaf techniques the campaign used under one tactic.

    Listed subtechniques count as themselves.  A parent listed with none
    of its subtechniques fans out to every subtechnique it has (coarse
    reporting); a parent listed alongside some of its subtechniques adds
    nothing beyond the listed ones.  A parent without subtechniques is
    itself a leaf.
    """
    camp = snapshot.campaign(campaign_id)
    snapshot.tactic(tactic_id)
    listed = {tech for tac, tech in camp.uses if tac == tactic_id}
    result: set[str] = set()
    for tech_id in listed:
        tech = snapshot.technique(tech_id)
        if tech.parent is not None:
            result.add(tech_id)
            continue
        subs = snapshot.subtechniques_of(tech_id)
        if not subs:
            result.add(tech_id)
        elif not any(s in listed for s in subs):
            result.update(subs)
    return frozenset(result)


class ProbMatrix:
    """Per-tactic technique likelihoods, kept as exact fractions."""

    def __init__(self, snapshot: KnowledgeSnapshot):
        self.version = snapshot.version
        self._snapshot = snapshot
        self._counts: dict[str, Counter[str]] = {}
        self._totals: dict[str, int] = {}
        for tactic in snapshot.tactics:
            counter: Counter[str] = Counter()
            for campaign_id in snapshot.campaigns:
                counter.update(normalize_usage(snapshot, campaign_id, tactic.id))
            self._counts[tactic.id] = counter
            self._totals[tactic.id] = sum(counter.values())

    def prob(self, tech_id: str, tactic_id: str) -> Fraction:
        """Likelihood of one leaf technique under one tactic, exact."""
        if tactic_id not in self._counts:
            raise UnknownEntityError(f"unknown tactic {tactic_id!r}")
        self._snapshot.technique(tech_id)
        total = self._totals[tactic_id]
        if total == 0:
            raise UnknownEntityError(
                f"tactic {tactic_id!r} has no recorded usage in any campaign"
            )
        return Fraction(self._counts[tactic_id][tech_id], total)

    def prob_float(self, tech_id: str, tactic_id: str) -> float:
        return float(self.prob(tech_id, tactic_id))

    def observed_tactics(self) -> tuple[str, ...]:
        return tuple(t.id for t in self._snapshot.tactics if self._totals[t.id] > 0)

    def entries(self) -> list[tuple[str, str, Fraction]]:
        """Non-zero (technique, tactic, probability) rows, deterministic order."""
        rows: list[tuple[str, str, Fraction]] = []
        for tactic in self._snapshot.tactics:
            total = self._totals[tactic.id]
            if total == 0:
                continue
            for tech_id in sorted(self._counts[tactic.id]):
                rows.append((tech_id, tactic.id, Fraction(self._counts[tactic.id][tech_id], total)))
        return rows


def likelihoods(snapshot: KnowledgeSnapshot) -> ProbMatrix:
    """Technique likelihoods per tactic over all campaigns in the snapshot."""
    return ProbMatrix(snapshot)


class CampaignMatrix:
    """Which leaf techniques one campaign used, keyed by (technique, tactic)."""

    def __init__(self, snapshot: KnowledgeSnapshot, campaign_id: str):
        self.campaign_id = campaign_id
        used: set[tuple[str, str]] = set()
        for tactic in snapshot.tactics:
            for leaf in normalize_usage(snapshot, campaign_id, tactic.id):
                used.add((leaf, tactic.id))
        self._used = frozenset(used)

    def used(self, tech_id: str, tactic_id: str) -> bool:
        return (tech_id, tactic_id) in self._used

    def pairs(self) -> list[tuple[str, str]]:
        return sorted(self._used)


def campaign_matrix(snapshot: KnowledgeSnapshot, campaign_id: str) -> CampaignMatrix:
    snapshot.campaign(campaign_id)
    return CampaignMatrix(snapshot, campaign_id)


# -- serialization ----------------------------------------------------------


def _require(mapping: Mapping, key: str, kind: type, where: str):
    if not isinstance(mapping, Mapping):
        raise ParseError(f"{where}: expected an object")
    value = mapping.get(key)
    if value is None:
        raise ParseError(f"{where}: missing field {key!r}")
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParseError(f"{where}: field {key!r} must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise ParseError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def load_snapshot(source: str | IO[str]) -> KnowledgeSnapshot:
    """Read a snapshot/1 JSON document from a path or open text file."""
    if isinstance(source, str):
        with open(source, encoding="utf-8") as fh:
            return load_snapshot(fh)
    try:
        data = json.load(source)
    except json.JSONDecodeError as exc:
        raise ParseError(f"snapshot is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("snapshot: top level must be an object")
    if data.get("format") != "snapshot/1":
        raise ParseError("snapshot: missing or unsupported format marker")
    version = _require(data, "version", str, "snapshot")
    tactics = [
        Tactic(_require(t, "id", str, "tactic"), _require(t, "name", str, "tactic"))
        for t in _require(data, "tactics", list, "snapshot")
    ]
    techniques = []
    for raw in _require(data, "techniques", list, "snapshot"):
        parent = raw.get("parent") if isinstance(raw, Mapping) else None
        if parent is not None and not isinstance(parent, str):
            raise ParseError("technique: field 'parent' must be str")
        tactics_field = _require(raw, "tactics", list, "technique")
        if not all(isinstance(x, str) for x in tactics_field):
            raise ParseError("technique: field 'tactics' must be a list of ids")
        techniques.append(
            Technique(
                _require(raw, "id", str, "technique"),
                _require(raw, "name", str, "technique"),
                parent,
                tuple(tactics_field),
            )
        )
    campaigns = []
    for raw in _require(data, "campaigns", list, "snapshot"):
        uses = set()
        for pair in _require(raw, "uses", list, "campaign"):
            uses.add(
                (
                    _require(pair, "tactic", str, "usage pair"),
                    _require(pair, "technique", str, "usage pair"),
                )
            )
        campaigns.append(
            Campaign(
                _require(raw, "id", str, "campaign"),
                _require(raw, "name", str, "campaign"),
                frozenset(uses),
            )
        )
    return KnowledgeSnapshot(version, tactics, techniques, campaigns)


def snapshot_to_dict(snapshot: KnowledgeSnapshot) -> dict:
    tactic_pos = {t.id: i for i, t in enumerate(snapshot.tactics)}
    return {
        "format": "snapshot/1",
        "version": snapshot.version,
        "tactics": [{"id": t.id, "name": t.name} for t in snapshot.tactics],
        "techniques": [
            {"id": t.id, "name": t.name, "parent": t.parent, "tactics": list(t.tactics)}
            for t in snapshot.techniques.values()
        ],
        "campaigns": [
            {
                "id": c.id,
                "name": c.name,
                "uses": [
                    {"tactic": tac, "technique": tech}
                    for tac, tech in sorted(
                        c.uses, key=lambda p: (tactic_pos.get(p[0], len(tactic_pos)), p[1])
                    )
                ],
            }
            for c in snapshot.campaigns.values()
        ],
    }


def save_snapshot(snapshot: KnowledgeSnapshot, target: str | IO[str]) -> None:
    """Write canonical snapshot/1 JSON (stable bytes for equal snapshots)."""
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8") as fh:
            save_snapshot(snapshot, fh)
        return
    json.dump(snapshot_to_dict(snapshot), target, indent=2)
    target.write("\n")


def write_likelihood_csv(matrix: ProbMatrix, target: str | IO[str]) -> None:
    """CSV export: header technique,tactic,probability, 12 significant digits."""
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_likelihood_csv(matrix, fh)
        return
    writer = csv.writer(target)
    writer.writerow(["technique", "tactic", "probability"])
    for tech_id, tactic_id, p in matrix.entries():
        writer.writerow([tech_id, tactic_id, f"{float(p):.12g}"])
