"""Best-effort import of MITRE-style STIX 2.x bundles into snapshots.

Reads tactics, techniques (parent/sub split derived from external ids of
the form T####.###), campaigns, and campaign-to-technique `uses`
relationships.  Tactic association comes from each technique's
kill_chain_phases tags; a technique tagged with several tactics yields
one usage pair per tactic, each flagged with a warning.
"""

from __future__ import annotations

import json
import logging
from typing import IO, Mapping

from .errors import InvariantError, ParseError
from .snapshot import (
    ENTERPRISE_TACTIC_ORDER,
    Campaign,
    KnowledgeSnapshot,
    Tactic,
    Technique,
)

logger = logging.getLogger(__name__)


def _mitre_id(obj: Mapping) -> str | None:
    for ref in obj.get("external_references", ()):
        if isinstance(ref, Mapping) and ref.get("source_name") == "mitre-attack":
            ext = ref.get("external_id")
            if isinstance(ext, str):
                return ext
    return None


def _dead(obj: Mapping) -> bool:
    return bool(obj.get("x_mitre_deprecated")) or bool(obj.get("revoked"))


def _phases(obj: Mapping) -> list[str]:
    names = []
    for phase in obj.get("kill_chain_phases", ()):
        if isinstance(phase, Mapping) and phase.get("kill_chain_name") in (
            "mitre-attack",
            "mitre-mobile-attack",
            "mitre-ics-attack",
        ):
            name = phase.get("phase_name")
            if isinstance(name, str):
                names.append(name)
    return names


def import_stix(source: str | IO[str]) -> KnowledgeSnapshot:
    """Convert one STIX bundle into a canonical snapshot."""
    if isinstance(source, str):
        with open(source, encoding="utf-8") as fh:
            return import_stix(fh)
    try:
        data = json.load(source)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bundle is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("objects"), list):
        raise ParseError("bundle: expected an object with an 'objects' list")

    objects = [o for o in data["objects"] if isinstance(o, Mapping)]
    by_stix_id = {o["id"]: o for o in objects if isinstance(o.get("id"), str)}

    version = "unknown"
    for obj in objects:
        if obj.get("type") == "x-mitre-collection":
            raw = obj.get("x_mitre_version")
            if isinstance(raw, str) and raw:
                version = f"mitre-enterprise-v{raw}"
            break

    # Tactics: canonical matrix order first, any stragglers by id.
    shortname_to_id: dict[str, str] = {}
    tactic_objs: list[tuple[str, str, str]] = []
    for obj in objects:
        if obj.get("type") != "x-mitre-tactic" or _dead(obj):
            continue
        ext = _mitre_id(obj)
        short = obj.get("x_mitre_shortname")
        if ext is None or not isinstance(short, str):
            logger.warning("skipping tactic without external id/shortname: %s", obj.get("id"))
            continue
        shortname_to_id[short] = ext
        tactic_objs.append((short, ext, obj.get("name", ext)))

    def tactic_rank(entry: tuple[str, str, str]):
        short, ext, _ = entry
        try:
            return (ENTERPRISE_TACTIC_ORDER.index(short), ext)
        except ValueError:
            return (len(ENTERPRISE_TACTIC_ORDER), ext)

    tactics = [Tactic(ext, name) for _, ext, name in sorted(tactic_objs, key=tactic_rank)]

    techniques: dict[str, Technique] = {}
    stix_to_tech: dict[str, str] = {}
    for obj in objects:
        if obj.get("type") != "attack-pattern" or _dead(obj):
            continue
        ext = _mitre_id(obj)
        if ext is None:
            logger.warning("skipping technique without external id: %s", obj.get("id"))
            continue
        parent = ext.rsplit(".", 1)[0] if "." in ext else None
        tags = []
        for short in _phases(obj):
            tactic_id = shortname_to_id.get(short)
            if tactic_id is None:
                logger.warning("technique %s: unknown tactic shortname %r", ext, short)
            elif tactic_id not in tags:
                tags.append(tactic_id)
        techniques[ext] = Technique(ext, obj.get("name", ext), parent, tuple(tags))
        stix_to_tech[obj["id"]] = ext

    for tech in techniques.values():
        if tech.parent is not None and tech.parent not in techniques:
            raise InvariantError(
                f"technique {tech.id!r}: parent {tech.parent!r} missing from the bundle"
            )

    campaign_objs: dict[str, tuple[str, str]] = {}
    for obj in objects:
        if obj.get("type") != "campaign" or _dead(obj):
            continue
        ext = _mitre_id(obj)
        if ext is None:
            logger.warning("skipping campaign without external id: %s", obj.get("id"))
            continue
        campaign_objs[obj["id"]] = (ext, obj.get("name", ext))
    if not campaign_objs:
        raise InvariantError("bundle contains no campaign objects")

    uses: dict[str, set[tuple[str, str]]] = {sid: set() for sid in campaign_objs}
    for obj in objects:
        if obj.get("type") != "relationship" or obj.get("relationship_type") != "uses":
            continue
        if _dead(obj):
            continue
        src = obj.get("source_ref")
        dst = obj.get("target_ref")
        if src not in campaign_objs:
            continue
        if not isinstance(dst, str) or dst not in by_stix_id:
            raise InvariantError(
                f"relationship {obj.get('id')!r}: dangling target {dst!r}"
            )
        tech_id = stix_to_tech.get(dst)
        if tech_id is None:
            # Campaigns also use malware/tools; only direct technique
            # usage feeds the snapshot.
            continue
        tags = techniques[tech_id].tactics
        camp_ext = campaign_objs[src][0]
        if len(tags) > 1:
            for tactic_id in tags:
                logger.warning(
                    "campaign %s: technique %s is tagged with several tactics; "
                    "recording usage under %s",
                    camp_ext,
                    tech_id,
                    tactic_id,
                )
        if not tags:
            logger.warning(
                "campaign %s: technique %s has no tactic tag; usage dropped",
                camp_ext,
                tech_id,
            )
        for tactic_id in tags:
            uses[src].add((tactic_id, tech_id))

    campaigns = [
        Campaign(ext, name, frozenset(uses[sid]))
        for sid, (ext, name) in sorted(campaign_objs.items(), key=lambda kv: kv[1][0])
    ]
    return KnowledgeSnapshot(version, tactics, techniques.values(), campaigns)
