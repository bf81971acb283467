"""Operator entry point: core runtime, ontology tooling, benchmark, services.

Ontology subcommands exit 0 on success, 1 on reasoning errors (resource
limit), and 2 on input errors (syntax, undeclared names, unreadable files).
"""

from __future__ import annotations

import asyncio
import json
import logging
import sys
from pathlib import Path

import click

from . import bench as bench_mod
from .core.config import ConfigError, load_config
from .core.registry import RegistryCorrupt
from .core.server import BindError, OntologyLoadError, run_core
from .ontology import (
    OntologyError,
    Reasoner,
    ResourceLimit,
    UnknownName,
    direct_hierarchy,
    load_ontology,
)
from .services import parse_host_port
from .services import classifier as classifier_mod
from .services import commfilter as filter_mod
from .services import predictor as predictor_mod
from .services import replay as replay_mod

EXIT_OK = 0
EXIT_REASONING = 1
EXIT_INPUT = 2


@click.group()
@click.option("--verbose", is_flag=True, help="Debug logging.")
def main(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


# --- core ----------------------------------------------------------------------


@main.group()
def core() -> None:
    """Run the framework core."""


@core.command("run")
@click.option("--config", "config_path", required=True, type=click.Path())
def core_run(config_path: str) -> None:
    """Start the core with the given config file."""
    try:
        cfg = load_config(config_path)
        asyncio.run(run_core(cfg))
    except (ConfigError, OntologyLoadError, RegistryCorrupt, BindError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    except KeyboardInterrupt:
        pass


# --- ontology tooling -------------------------------------------------------------


def _load_or_exit(path: str, lenient: bool):
    try:
        return load_ontology(path, strict=not lenient)
    except OSError as e:
        click.echo(f"error: cannot read {path}: {e}", err=True)
        sys.exit(EXIT_INPUT)
    except OntologyError as e:
        click.echo(f"error: {path}: {e}", err=True)
        sys.exit(EXIT_INPUT)


@main.group()
def ont() -> None:
    """Ontology tooling: check, classify, realize, query."""


@ont.command("check")
@click.argument("path", type=click.Path())
@click.option("--lenient", is_flag=True, help="Auto-declare names on first use.")
@click.option("--json", "as_json", is_flag=True)
def ont_check(path: str, lenient: bool, as_json: bool) -> None:
    """Validate syntax and declarations."""
    ontology = _load_or_exit(path, lenient)
    counts = {
        "classes": len(ontology.class_names),
        "roles": len(ontology.role_names),
        "individuals": len(ontology.individual_names),
        "axioms_and_assertions": len(ontology.tbox) + len(ontology.abox),
    }
    if as_json:
        click.echo(json.dumps({"ok": True, **counts}))
    else:
        click.echo(
            "OK: {classes} classes, {roles} roles, {individuals} individuals, "
            "{axioms_and_assertions} axioms+assertions".format(**counts)
        )


@ont.command("classify")
@click.argument("path", type=click.Path())
@click.option("--lenient", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
def ont_classify(path: str, lenient: bool, as_json: bool) -> None:
    """Print the direct subsumption hierarchy over declared classes."""
    ontology = _load_or_exit(path, lenient)
    try:
        state = Reasoner(ontology).tbox_state()
    except ResourceLimit as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_REASONING)
    groups, edges = direct_hierarchy(state, ontology.class_names)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "equivalence_groups": [list(g) for g in groups if len(g) > 1],
                    "edges": [list(e) for e in edges],
                }
            )
        )
        return
    for group in groups:
        if len(group) > 1:
            click.echo("equivalent: " + " = ".join(group))
    for sub, sup in edges:
        click.echo(f"{sub} -> {sup}")


@ont.command("realize")
@click.argument("path", type=click.Path())
@click.option("--lenient", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
def ont_realize(path: str, lenient: bool, as_json: bool) -> None:
    """Print every individual's derived class names."""
    ontology = _load_or_exit(path, lenient)
    try:
        realization = Reasoner(ontology).realize()
    except ResourceLimit as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_REASONING)
    if as_json:
        click.echo(
            json.dumps(
                {i: sorted(ts) for i, ts in sorted(realization.types.items())}
            )
        )
        return
    for individual in sorted(realization.types):
        types = ", ".join(sorted(realization.types[individual]))
        click.echo(f"{individual}: {types}")


@ont.command("query")
@click.argument("path", type=click.Path())
@click.argument("what", type=click.Choice(["instances", "types"]))
@click.argument("name")
@click.option("--lenient", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
def ont_query(path: str, what: str, name: str, lenient: bool, as_json: bool) -> None:
    """Query instances of a class or types of an individual."""
    ontology = _load_or_exit(path, lenient)
    try:
        realization = Reasoner(ontology).realize()
        if what == "instances":
            result = list(realization.instances_of(name))
        else:
            result = sorted(realization.types_of(name))
    except ResourceLimit as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_REASONING)
    except UnknownName as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT)
    if as_json:
        click.echo(json.dumps(result))
    else:
        click.echo(", ".join(result) if result else "(none)")


# --- benchmark ---------------------------------------------------------------------


@main.group("bench")
def bench_group() -> None:
    """Synthetic-ontology scale benchmark."""


@bench_group.command("gen")
@click.option("--axioms", "n_axioms", type=int, required=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def bench_gen(n_axioms: int, seed: int, out_path: str) -> None:
    """Write a seeded synthetic ontology with at least --axioms axioms."""
    text = bench_mod.generate_ontology_text(n_axioms, seed)
    Path(out_path).write_text(text, encoding="utf-8")
    click.echo(f"wrote {out_path} ({n_axioms}+ axioms, seed {seed})")


@bench_group.command("run")
@click.argument("path", type=click.Path())
@click.option("--repetitions", type=int, default=3, show_default=True)
@click.option("--fact-limit", type=int, default=None, help="Derived-fact cap.")
@click.option("--json", "as_json", is_flag=True)
def bench_run(path: str, repetitions: int, fact_limit: int | None, as_json: bool) -> None:
    """Time parse/normalize/saturate on an ontology file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT)
    kwargs = {} if fact_limit is None else {"fact_limit": fact_limit}
    try:
        report = bench_mod.run_benchmark(text, repetitions, **kwargs)
    except OntologyError as e:
        click.echo(f"error: {path}: {e}", err=True)
        sys.exit(EXIT_INPUT)
    if as_json:
        click.echo(json.dumps(report, indent=2))
    elif "error" in report:
        click.echo(
            f"ResourceLimit: stopped at {report['derived_facts_at_limit']} derived facts"
        )
        sys.exit(EXIT_REASONING)
    else:
        med = report["median"]
        click.echo(
            f"parse {med['parse_ms']:.1f} ms, normalize {med['normalize_ms']:.1f} ms, "
            f"saturate {med['saturate_ms']:.1f} ms (median of {report['repetitions']})"
        )
        click.echo(
            f"{report['classes']} classes, {report['axioms']} axioms, "
            f"{report['derived_facts']} derived facts, "
            f"~{report['peak_memory_estimate_bytes'] / 1e6:.1f} MB estimated peak"
        )
    if "error" in report:
        sys.exit(EXIT_REASONING)


# --- services ------------------------------------------------------------------------


@main.command("replay")
@click.option("--trace", "trace_path", type=click.Path(), required=True)
@click.option("--speed", default="inf", show_default=True, help="Real factor or inf.")
@click.option("--core", "core_addr", default="127.0.0.1:7468", show_default=True)
@click.option("--legend", "legend_path", type=click.Path(), default=None)
@click.option("--name", default="replay", show_default=True)
def replay_cmd(trace_path: str, speed: str, core_addr: str, legend_path: str | None, name: str) -> None:
    """Replay a recorded sensor trace into the core."""
    speed_value = float("inf") if speed == "inf" else float(speed)
    try:
        count = replay_mod.run_replay(
            parse_host_port(core_addr), trace_path, speed_value, legend_path, name
        )
    except replay_mod.TraceError as e:
        click.echo(f"error: {trace_path}: {e}", err=True)
        sys.exit(EXIT_INPUT)
    click.echo(f"published {count} sensor frame(s)")


@main.command("classify")
@click.option("--gen-corpus", "gen_corpus_path", type=click.Path(), default=None,
              help="Write a synthetic labeled corpus CSV and exit.")
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--windows-per-label", type=int, default=30, show_default=True)
@click.option("--train", "train_path", type=click.Path(), default=None,
              help="Train from a corpus CSV into --model and exit.")
@click.option("--model", "model_path", type=click.Path(), default=None)
@click.option("--core", "core_addr", default="127.0.0.1:7468", show_default=True)
@click.option("--subject", default="u", show_default=True)
@click.option("--topic", default="sensor/accel", show_default=True)
@click.option("--map", "map_path", type=click.Path(), default=None,
              help="JSON label -> context class table.")
@click.option("--home-map", "home_map_path", type=click.Path(), default=None,
              help="Run the smart-home event mapper instead of the accelerometer model.")
def classify_cmd(
    gen_corpus_path: str | None,
    seed: int,
    windows_per_label: int,
    train_path: str | None,
    model_path: str | None,
    core_addr: str,
    subject: str,
    topic: str,
    map_path: str | None,
    home_map_path: str | None,
) -> None:
    """Activity classification service (and its training/corpus tooling)."""
    if gen_corpus_path is not None:
        windows = classifier_mod.generate_corpus(seed, windows_per_label)
        classifier_mod.write_corpus_csv(gen_corpus_path, windows)
        click.echo(f"wrote {len(windows)} windows to {gen_corpus_path}")
        return
    if train_path is not None:
        if model_path is None:
            click.echo("error: --train needs --model for the output", err=True)
            sys.exit(EXIT_INPUT)
        try:
            model = classifier_mod.train(classifier_mod.load_corpus(train_path))
        except (ValueError, classifier_mod.InsufficientData) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_INPUT)
        model.save(model_path)
        click.echo(f"trained {len(model.labels)} labels -> {model_path}")
        return
    if home_map_path is not None:
        mapping = classifier_mod.load_home_map(home_map_path)
        count = classifier_mod.run_home_mapper(parse_host_port(core_addr), mapping)
        click.echo(f"mapped {count} event(s)")
        return
    if model_path is None:
        click.echo("error: need --model (or --train / --gen-corpus / --home-map)", err=True)
        sys.exit(EXIT_INPUT)
    label_map = None
    if map_path is not None:
        label_map = json.loads(Path(map_path).read_text(encoding="utf-8"))
    model = classifier_mod.CentroidModel.load(model_path)
    count = classifier_mod.run_activity_service(
        parse_host_port(core_addr), model, subject, topic, label_map
    )
    click.echo(f"classified {count} window(s)")


@main.command("predict")
@click.option("--core", "core_addr", default="127.0.0.1:7468", show_default=True)
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--history", "history_path", type=click.Path(), required=True)
def predict_cmd(core_addr: str, k: int, history_path: str) -> None:
    """Next-context prediction service."""
    count = predictor_mod.run_prediction_service(
        parse_host_port(core_addr), history_path, k
    )
    click.echo(f"answered {count} request(s)")


@main.command("filter")
@click.option("--core", "core_addr", default="127.0.0.1:7468", show_default=True)
@click.option("--rules", "rules_path", type=click.Path(), required=True)
@click.option("--scenario", "scenario_path", type=click.Path(), required=True)
@click.option("--subject", default=None)
@click.option("--log", "log_path", type=click.Path(), default=None,
              help="Decision log (JSON lines); default stdout.")
@click.option("--settle-ms", type=int, default=0, show_default=True,
              help="Delay scenario start to let contexts arrive.")
def filter_cmd(
    core_addr: str,
    rules_path: str,
    scenario_path: str,
    subject: str | None,
    log_path: str | None,
    settle_ms: int,
) -> None:
    """Context-based communication filter running a scripted scenario."""
    try:
        rules = filter_mod.load_rules(rules_path)
        scenario = filter_mod.load_scenario(scenario_path)
    except (OSError, json.JSONDecodeError, filter_mod.RulesError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT)
    sink = open(log_path, "a", encoding="utf-8") if log_path else sys.stdout
    try:
        decisions = filter_mod.run_filter_service(
            parse_host_port(core_addr),
            rules,
            scenario,
            subject=subject,
            decision_log=sink,
            settle_ms=settle_ms,
        )
    finally:
        if log_path:
            sink.close()
    blocked = sum(1 for d in decisions if d.action == "block")
    click.echo(f"{len(decisions)} decision(s), {blocked} blocked", err=True)


if __name__ == "__main__":
    main()
