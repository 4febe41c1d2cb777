"""Command line interface.

Diagnostics go to stderr; data goes to stdout or to the file named by
--out.  Exit codes: 0 success, 2 parse failure, 3 invariant violation,
4 unknown entity, 5 missing attribution, 6 formula error.
"""

from __future__ import annotations

import csv
import functools
import logging
import os
import sys

import click

from . import catm
from .atfile import AtDocument, read_at, write_at
from .errors import AttackQuantError, FormulaError, InvariantError
from .metrics import BUILTIN_LOADS, get_load, interval_tree_metric, tree_metric
from .snapshot import likelihoods, load_snapshot, save_snapshot, write_likelihood_csv
from .stix import import_stix
from .template import Difficulty, compare_all, instantiate
from . import template as template_mod

_DIFFICULTIES = click.Choice([d.value for d in Difficulty])
# load names resolve through get_load so an unknown one exits with the
# unknown-entity code instead of click's usage error
_METRIC_HELP = "One of: " + ", ".join(sorted(BUILTIN_LOADS)) + "."


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except AttackQuantError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(exc.exit_code)

    return wrapper


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Chattier diagnostics on stderr.")
@click.version_option(package_name="attackquant", prog_name="attackquant")
def main(verbose: bool) -> None:
    """Quantify and compare cyber-attack campaigns."""
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )


@main.command()
@click.argument("bundle", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Snapshot output path.")
@click.option("--likelihoods", "likelihood_csv", type=click.Path(dir_okay=False),
              help="Also write the per-tactic likelihood CSV here.")
@_guarded
def ingest(bundle: str, out: str, likelihood_csv: str | None) -> None:
    """Import a STIX bundle into a canonical snapshot."""
    snapshot = import_stix(bundle)
    save_snapshot(snapshot, out)
    if likelihood_csv:
        write_likelihood_csv(likelihoods(snapshot), likelihood_csv)


@main.command()
@click.argument("campaign")
@click.option("--snapshot", "snapshot_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--difficulty", type=_DIFFICULTIES, default="default", show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="AT output path.")
@_guarded
def template(campaign: str, snapshot_path: str, difficulty: str, out: str) -> None:
    """Write the pruned, probability-attributed template for one campaign."""
    snapshot = load_snapshot(snapshot_path)
    pruned, attribution = instantiate(snapshot, campaign, Difficulty(difficulty))
    doc = AtDocument(
        tree=pruned,
        prob={leaf: (p, p) for leaf, p in attribution.items()},
        top_extras={"snapshot_version": snapshot.version, "difficulty": difficulty},
    )
    write_at(doc, out)


@main.command()
@click.argument("at_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", "metric_name", default="maxprob", show_default=True,
              help=_METRIC_HELP)
@_guarded
def metric(at_file: str, metric_name: str) -> None:
    """Evaluate one metric of the tree in an at/1 file."""
    doc = read_at(at_file)
    doc.tree.require_valid()
    load = get_load(metric_name)
    if doc.has_intervals(metric_name):
        lo, hi = interval_tree_metric(load, doc.interval_attribution(metric_name), doc.tree)
        click.echo(f"[{lo:.6f}, {hi:.6f}]")
    else:
        value = tree_metric(load, doc.point_attribution(metric_name), doc.tree)
        click.echo(f"{value:.6f}")


@main.command()
@click.argument("snapshots", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--difficulty", type=_DIFFICULTIES, default="default", show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="CSV output path.")
@click.option("--allow-cross-version", is_flag=True,
              help="Permit comparing snapshots with different version strings.")
@_guarded
def compare(snapshots: tuple[str, ...], difficulty: str, out: str,
            allow_cross_version: bool) -> None:
    """Rank campaigns by security index; also writes <out stem>.plot.csv."""
    loaded = [load_snapshot(path) for path in snapshots]
    versions = {snap.version for snap in loaded}
    if len(versions) > 1 and not allow_cross_version:
        raise InvariantError(
            "snapshots carry different versions "
            f"({', '.join(sorted(versions))}); indices are not comparable "
            "across versions (pass --allow-cross-version to override)"
        )
    level = Difficulty(difficulty)
    rows: list[tuple[str, str, float | None]] = []
    spans: dict[str, tuple[str, dict[str, float | None]]] = {}
    for snap in loaded:
        probs = likelihoods(snap)
        for campaign_id, index in compare_all(snap, level, probs):
            if campaign_id in spans:
                raise InvariantError(
                    f"campaign {campaign_id!r} appears in more than one snapshot"
                )
            name = snap.campaign(campaign_id).name
            rows.append((campaign_id, name, index))
            per_level: dict[str, float | None] = {}
            for d in Difficulty:
                try:
                    per_level[d.value] = template_mod.campaign_index(snap, campaign_id, d, probs)
                except AttackQuantError:
                    per_level[d.value] = None
            spans[campaign_id] = (name, per_level)
    rows.sort(key=lambda r: (r[2] is None, r[2] if r[2] is not None else 0.0, r[0]))
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["campaign", "name", "difficulty", "index"])
        for campaign_id, name, index in rows:
            writer.writerow([
                campaign_id, name, difficulty,
                "undefined" if index is None else f"{index:.6f}",
            ])
    stem, ext = os.path.splitext(out)
    plot_path = f"{stem}.plot{ext or '.csv'}"
    ordered = sorted(
        spans.items(),
        key=lambda kv: (
            kv[1][1]["default"] is None,
            kv[1][1]["default"] if kv[1][1]["default"] is not None else 0.0,
            kv[0],
        ),
    )
    with open(plot_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["campaign", "name", "easy", "default", "hard"])
        for campaign_id, (name, per_level) in ordered:
            writer.writerow(
                [campaign_id, name]
                + [
                    "undefined" if per_level[d.value] is None else f"{per_level[d.value]:.6f}"
                    for d in Difficulty
                ]
            )


@main.command()
@click.argument("at_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--catm", "formula_text", required=True, help="Query formula.")
@click.option("--attack", "attack_text", default=None,
              help="Comma-separated BAS ids; omit for formula-metric mode.")
@click.option("--metric", "metric_name", default="maxprob", show_default=True,
              help="Load for formula-metric mode. " + _METRIC_HELP)
@click.pass_context
@_guarded
def query(ctx: click.Context, at_file: str, formula_text: str,
          attack_text: str | None, metric_name: str) -> None:
    """Evaluate a query formula against the tree in an at/1 file."""
    verbose = bool(ctx.parent and ctx.parent.params.get("verbose"))
    doc = read_at(at_file)
    doc.tree.require_valid()
    formula = catm.parse(formula_text)
    layer = catm.layer_of(formula)
    if attack_text is None:
        if layer == 2:
            raise FormulaError("a layer-2 formula needs --attack")
        load = get_load(metric_name)
        if doc.has_intervals(metric_name):
            result = catm.formula_metric(
                doc.tree, doc.interval_attribution(metric_name), load, formula
            )
            lo, hi = result
            click.echo(f"[{lo:.6f}, {hi:.6f}]")
        else:
            value = catm.formula_metric(
                doc.tree, doc.point_attribution(metric_name), load, formula
            )
            click.echo(f"{value:.6f}")
        return
    attack = frozenset(step for step in (s.strip() for s in attack_text.split(",")) if step)
    if layer == 1:
        verdict = catm.eval_layer1(doc.tree, attack, formula)
        click.echo("TRUE" if verdict else "FALSE")
        return
    trace: list[str] | None = [] if verbose else None
    value = catm.eval_layer2(doc.tree, attack, doc.attributions(), formula, trace)
    if trace:
        for line in trace:
            click.echo(line, err=True)
    click.echo(value.name)


@main.command()
@click.argument("at_file", type=click.Path(exists=True, dir_okay=False))
@_guarded
def check(at_file: str) -> None:
    """Validate an at/1 file; exit 3 listing violations if invalid."""
    doc = read_at(at_file)
    violations = doc.tree.validate()
    if violations:
        for violation in violations:
            click.echo(violation, err=True)
        sys.exit(3)
    click.echo("OK")


if __name__ == "__main__":
    main()
