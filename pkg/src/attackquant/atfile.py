"""Reader and writer for the at/1 JSON attack tree interchange format.

A document carries the tree shape plus optional leaf attributions:
``prob`` (a number) or ``prob_interval`` ([lo, hi]) for probabilities,
and an optional ``attrs`` object ({load-name: value | [lo, hi]}) for the
other metric domains.  Unknown fields are ignored but carried through a
read/write round trip.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO

from .errors import InvariantError, MissingAttributionError, ParseError
from .metrics import BUILTIN_LOADS, Interval, get_load, neg_log
from .tree import AttackTree, GateType, Node

_NODE_FIELDS = {"id", "type", "children", "label", "tactic", "technique", "prob", "prob_interval", "attrs"}
_TOP_FIELDS = {"format", "root", "nodes"}


@dataclass
class AtDocument:
    """One parsed at/1 file: the tree plus its attributions and extras."""

    tree: AttackTree
    prob: dict[str, Interval] = field(default_factory=dict)
    attrs: dict[str, dict[str, Interval]] = field(default_factory=dict)
    top_extras: dict = field(default_factory=dict)
    node_extras: dict[str, dict] = field(default_factory=dict)

    def has_intervals(self, load_name: str) -> bool:
        entries = self._entries(load_name)
        return any(lo != hi for lo, hi in entries.values())

    def _entries(self, load_name: str) -> dict[str, Interval]:
        get_load(load_name)
        if load_name == "maxprob":
            return self.prob
        if load_name == "security-index":
            # Derived from probabilities; -ln is antitone, so ends swap.
            return {
                step: (neg_log(hi), neg_log(lo))
                for step, (lo, hi) in self.prob.items()
            }
        return self.attrs.get(load_name, {})

    def interval_attribution(self, load_name: str) -> dict[str, Interval]:
        return dict(self._entries(load_name))

    def point_attribution(self, load_name: str) -> dict[str, float]:
        entries = self._entries(load_name)
        out: dict[str, float] = {}
        for step, (lo, hi) in entries.items():
            if lo != hi:
                raise MissingAttributionError(
                    f"leaf {step!r} carries a {load_name} interval, not a point value"
                )
            out[step] = lo
        return out

    def attributions(self) -> dict[str, dict[str, Interval]]:
        """Interval attribution per load, for query evaluation."""
        out: dict[str, dict[str, Interval]] = {}
        for name in BUILTIN_LOADS:
            entries = self._entries(name)
            if entries:
                out[name] = dict(entries)
        return out


def _interval_from(raw, where: str, load_name: str) -> Interval:
    load = get_load(load_name)
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        value = load.check_value(float(raw), where)
        return (value, value)
    if (
        isinstance(raw, list)
        and len(raw) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in raw)
    ):
        lo, hi = float(raw[0]), float(raw[1])
        if lo > hi:
            raise InvariantError(f"{where}: interval bounds out of order [{lo}, {hi}]")
        load.check_value(lo, where)
        load.check_value(hi, where)
        return (lo, hi)
    raise ParseError(f"{where}: expected a number or [lo, hi]")


def read_at(source: str | IO[str]) -> AtDocument:
    """Parse an at/1 document from a path or open text file."""
    if isinstance(source, str):
        with open(source, encoding="utf-8") as fh:
            return read_at(fh)
    try:
        data = json.load(source)
    except json.JSONDecodeError as exc:
        raise ParseError(f"attack tree file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("attack tree file: top level must be an object")
    if data.get("format") != "at/1":
        raise ParseError("attack tree file: missing or unsupported format marker")
    root = data.get("root")
    if not isinstance(root, str):
        raise ParseError("attack tree file: 'root' must be a node id")
    raw_nodes = data.get("nodes")
    if not isinstance(raw_nodes, list):
        raise ParseError("attack tree file: 'nodes' must be a list")

    nodes: list[Node] = []
    prob: dict[str, Interval] = {}
    attrs: dict[str, dict[str, Interval]] = {}
    node_extras: dict[str, dict] = {}
    for raw in raw_nodes:
        if not isinstance(raw, dict):
            raise ParseError("attack tree file: each node must be an object")
        nid = raw.get("id")
        if not isinstance(nid, str) or not nid:
            raise ParseError("attack tree file: node without a string id")
        where = f"node {nid!r}"
        type_name = raw.get("type")
        try:
            gate = GateType(type_name)
        except ValueError:
            raise ParseError(f"{where}: unknown type {type_name!r}") from None
        children = raw.get("children", [])
        if not isinstance(children, list) or not all(isinstance(c, str) for c in children):
            raise ParseError(f"{where}: 'children' must be a list of ids")
        for key in ("label", "tactic", "technique"):
            if raw.get(key) is not None and not isinstance(raw[key], str):
                raise ParseError(f"{where}: {key!r} must be a string")
        nodes.append(
            Node(nid, gate, tuple(children), raw.get("label"), raw.get("tactic"), raw.get("technique"))
        )
        if "prob" in raw and "prob_interval" in raw:
            raise InvariantError(f"{where}: both prob and prob_interval present")
        for key in ("prob", "prob_interval"):
            if key in raw:
                if gate is not GateType.BAS:
                    raise InvariantError(f"{where}: probability on a non-BAS node")
                prob[nid] = _interval_from(raw[key], where, "maxprob")
        raw_attrs = raw.get("attrs")
        if raw_attrs is not None:
            if not isinstance(raw_attrs, dict):
                raise ParseError(f"{where}: 'attrs' must be an object")
            if gate is not GateType.BAS:
                raise InvariantError(f"{where}: attrs on a non-BAS node")
            for load_name, raw_value in raw_attrs.items():
                attrs.setdefault(load_name, {})[nid] = _interval_from(
                    raw_value, f"{where} attrs[{load_name!r}]", load_name
                )
        extras = {k: v for k, v in raw.items() if k not in _NODE_FIELDS}
        if extras:
            node_extras[nid] = extras

    tree = AttackTree(nodes, root)
    top_extras = {k: v for k, v in data.items() if k not in _TOP_FIELDS}
    return AtDocument(tree, prob, attrs, top_extras, node_extras)


def at_to_dict(doc: AtDocument) -> dict:
    out: dict = {"format": "at/1", "root": doc.tree.root}
    out.update(doc.top_extras)
    rendered = []
    for node in doc.tree.nodes.values():
        raw: dict = {"id": node.id, "type": node.type.value}
        if node.children:
            raw["children"] = list(node.children)
        for key, value in (("label", node.label), ("tactic", node.tactic), ("technique", node.technique)):
            if value is not None:
                raw[key] = value
        if node.id in doc.prob:
            lo, hi = doc.prob[node.id]
            if lo == hi:
                raw["prob"] = lo
            else:
                raw["prob_interval"] = [lo, hi]
        per_node = {
            load_name: entries[node.id]
            for load_name, entries in sorted(doc.attrs.items())
            if node.id in entries
        }
        if per_node:
            raw["attrs"] = {
                load_name: (lo if lo == hi else [lo, hi])
                for load_name, (lo, hi) in per_node.items()
            }
        raw.update(doc.node_extras.get(node.id, {}))
        rendered.append(raw)
    out["nodes"] = rendered
    return out


def write_at(doc: AtDocument, target: str | IO[str]) -> None:
    """Write at/1 JSON with stable bytes for equal documents."""
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8") as fh:
            write_at(doc, fh)
        return
    json.dump(at_to_dict(doc), target, indent=2)
    target.write("\n")
