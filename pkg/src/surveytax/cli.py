"""surveytax command line: ingest, stats, build-graph, train, run, ablate,
export-weak-labels, export-embeddings, judge.

Every flag can also come from a config file of `key = value` lines (see
MANUAL.md); explicit flags win. Domain failures exit 1 with an error
category on stderr; usage errors exit 2.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import evaluation, gcn, graphs, llmjudge, weaklabel
from .corpus import (
    SubsetSpec,
    Taxonomy,
    build_subset,
    corpus_stats,
    load_records,
    write_records,
    write_stats_csv,
)
from .errors import SurveyTaxError


def parse_seeds(text: str) -> tuple[int, ...]:
    """`0..4` (inclusive range), `0,2,4`, or a single integer."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(part) for part in text.split(",") if part.strip())


def parse_removed(text: str | None) -> frozenset[str]:
    if not text:
        return frozenset()
    return frozenset(part.strip() for part in text.split(",") if part.strip())


def read_config_file(path: str | Path) -> dict[str, str]:
    """Flat `key = value` lines; `#` starts a comment; keys use flag names."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SurveyTaxError(f"config line without '=': {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip().strip("\"'")
    return values


def _defaults_for(command: click.Command, values: dict[str, str]) -> dict[str, str]:
    """Match config keys against a command's flags and parameter names."""
    out: dict[str, str] = {}
    for param in command.params:
        candidates = {param.name}
        candidates.update(opt.lstrip("-").replace("-", "_") for opt in param.opts)
        for key in candidates:
            if key in values:
                out[param.name] = values[key]
    return out


def domain_errors(fn):
    """Map domain errors to exit code 1 with their category on stderr."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SurveyTaxError as exc:
            click.echo(f"error[{exc.category}]: {exc}", err=True)
            sys.exit(1)

    return wrapper


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Key=value file supplying flag defaults.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None):
    """Classify survey papers into a taxonomy with attributed graphs and a GCN."""
    if config_path:
        values = read_config_file(config_path)
        ctx.default_map = {
            name: _defaults_for(command, values)
            for name, command in main.commands.items()
        }


def _load(data: str, taxonomy_path: str | None):
    taxonomy = Taxonomy.from_file(taxonomy_path) if taxonomy_path else Taxonomy.default()
    return load_records(data, taxonomy), taxonomy


data_option = click.option("--data", required=True, type=click.Path(exists=True),
                           help="Corpus JSON Lines file.")
taxonomy_option = click.option("--taxonomy", "taxonomy_path", type=click.Path(exists=True),
                               default=None, help="Taxonomy JSON (default: bundled).")
graph_option = click.option("--graph", "graph_kind", default="cocategory", show_default=True,
                            type=click.Choice(evaluation.GRAPH_KINDS))
window_option = click.option("--window", "window_size", default=graphs.DEFAULT_WINDOW_SIZE,
                             show_default=True, help="Sliding window size for text graphs.")


def train_options(fn):
    fn = click.option("--lr", "learning_rate", type=float, default=None,
                      help="Learning rate (default: 2e-2 text, 1e-2 otherwise).")(fn)
    fn = click.option("--epochs", default=500, show_default=True)(fn)
    fn = click.option("--hidden", default=200, show_default=True)(fn)
    fn = click.option("--dropout", default=0.5, show_default=True)(fn)
    fn = click.option("--select", default="best_val", show_default=True,
                      type=click.Choice(["best_val", "final"]))(fn)
    return fn


def _base_config(graph_kind, learning_rate, epochs, hidden, dropout, select, seed=0):
    lr = learning_rate if learning_rate is not None else evaluation.DEFAULT_LEARNING_RATES[graph_kind]
    return gcn.TrainConfig(
        learning_rate=lr, epochs=epochs, seed=seed,
        hidden=hidden, dropout_rate=dropout, select=select,
    )


@main.command()
@data_option
@taxonomy_option
@click.option("--cutoff", default=None, help="Keep records released on/before this ISO date.")
@click.option("--remove-classes", default=None, help="Comma-separated taxonomy classes to drop.")
@click.option("--out", type=click.Path(), default=None, help="Write the filtered corpus here.")
@domain_errors
def ingest(data, taxonomy_path, cutoff, remove_classes, out):
    """Validate (and optionally subset) a corpus file."""
    records, taxonomy = _load(data, taxonomy_path)
    spec = SubsetSpec(cutoff_date=cutoff,
                      removed_classes=frozenset(parse_removed(remove_classes)))
    subset = build_subset(records, spec, taxonomy)
    click.echo(f"{len(records)} records read, {len(subset)} after filtering")
    if out:
        write_records(subset, out)
        click.echo(f"wrote {out}")


@main.command()
@data_option
@taxonomy_option
@click.option("--out", required=True, type=click.Path(),
              help="Output path (.csv for plot data, otherwise JSON).")
@click.option("--top-k", default=30, show_default=True)
@domain_errors
def stats(data, taxonomy_path, out, top_k):
    """Emit corpus statistics (monthly trend, class/category histograms, keywords)."""
    records, _ = _load(data, taxonomy_path)
    report = corpus_stats(records, top_k=top_k)
    if out.endswith(".csv"):
        write_stats_csv(report, out)
    else:
        Path(out).write_text(
            json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    click.echo(f"wrote {out}")


@main.command("build-graph")
@data_option
@taxonomy_option
@graph_option
@window_option
@click.option("--remove", default=None, help="Categories removed before edge construction.")
@click.option("--out-prefix", required=True, type=click.Path())
@domain_errors
def build_graph_cmd(data, taxonomy_path, graph_kind, window_size, remove, out_prefix):
    """Build one attributed graph and export edges/nodes/features."""
    records, taxonomy = _load(data, taxonomy_path)
    graph = evaluation.build_graph(records, graph_kind, taxonomy,
                                   parse_removed(remove), window_size)
    prefix = Path(out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    graphs.write_edge_tsv(graph, f"{prefix}.edges.tsv")
    graphs.write_node_csv(graph, f"{prefix}.nodes.csv")
    graph.features.save(f"{prefix}.features")
    stats_ = graphs.graph_stats(graph)
    click.echo(json.dumps(stats_.to_json_dict(), sort_keys=True))


@main.command("train")
@data_option
@taxonomy_option
@graph_option
@window_option
@click.option("--remove", default=None)
@click.option("--seed", default=0, show_default=True)
@train_options
@click.option("--out-prefix", required=True, type=click.Path(),
              help="Checkpoint prefix (.bin/.json) plus .metrics.json.")
@domain_errors
def train_cmd(data, taxonomy_path, graph_kind, window_size, remove, seed,
              learning_rate, epochs, hidden, dropout, select, out_prefix):
    """Train one GCN and save its selected checkpoint."""
    records, taxonomy = _load(data, taxonomy_path)
    graph = evaluation.build_graph(records, graph_kind, taxonomy,
                                   parse_removed(remove), window_size)
    config = _base_config(graph_kind, learning_rate, epochs, hidden, dropout, select, seed)
    run = gcn.train(graph, config, taxonomy)
    prefix = Path(out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    gcn.save_checkpoint(run.selected_model(), prefix, config, taxonomy)
    metrics_path = Path(f"{prefix}.metrics.json")
    metrics_path.write_text(
        json.dumps({"best_epoch": run.best_epoch, "metrics": run.final_metrics},
                   indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    click.echo(json.dumps(run.final_metrics["test"], sort_keys=True))


@main.command("run")
@data_option
@taxonomy_option
@graph_option
@window_option
@click.option("--remove", default=None, help="Ablation: categories to remove, e.g. cs.CL,cs.AI.")
@click.option("--seeds", default="0..4", show_default=True)
@train_options
@click.option("--out", required=True, type=click.Path())
@click.option("--markdown", "markdown_out", type=click.Path(), default=None)
@click.option("--csv", "csv_out", type=click.Path(), default=None)
@domain_errors
def run_cmd(data, taxonomy_path, graph_kind, window_size, remove, seeds,
            learning_rate, epochs, hidden, dropout, select, out, markdown_out,
            csv_out):
    """Multi-seed experiment with mean(std) aggregation."""
    records, taxonomy = _load(data, taxonomy_path)
    config = _base_config(graph_kind, learning_rate, epochs, hidden, dropout, select)
    report = evaluation.run_experiment(
        records, graph_kind, taxonomy,
        removed_categories=parse_removed(remove),
        seeds=parse_seeds(seeds),
        base_config=config,
        window_size=window_size,
    )
    evaluation.write_report_json([report], out)
    if markdown_out:
        Path(markdown_out).write_text(evaluation.format_markdown_table([report]),
                                      encoding="utf-8")
    if csv_out:
        evaluation.write_report_csv([report], csv_out)
    agg = report.aggregate
    click.echo(f"{report.label}: accuracy {100 * agg['accuracy']['mean']:.2f} "
               f"({100 * agg['accuracy']['std']:.2f})")


@main.command("ablate")
@data_option
@taxonomy_option
@window_option
@click.option("--remove-sets", required=True,
              help="Semicolon-separated removal sets, e.g. 'cs.CL;cs.AI;cs.CL,cs.AI'. "
                   "The no-removal baseline always runs first.")
@click.option("--seeds", default="0..4", show_default=True)
@train_options
@click.option("--out", required=True, type=click.Path())
@click.option("--markdown", "markdown_out", type=click.Path(), default=None)
@click.option("--csv", "csv_out", type=click.Path(), default=None)
@domain_errors
def ablate_cmd(data, taxonomy_path, window_size, remove_sets, seeds,
               learning_rate, epochs, hidden, dropout, select, out, markdown_out,
               csv_out):
    """Co-category ablation sweep over several removal sets."""
    records, taxonomy = _load(data, taxonomy_path)
    config = _base_config("cocategory", learning_rate, epochs, hidden, dropout, select)
    removal_sets = [frozenset()] + [parse_removed(part) for part in remove_sets.split(";")]
    reports = [
        evaluation.run_experiment(
            records, "cocategory", taxonomy,
            removed_categories=removed, seeds=parse_seeds(seeds),
            base_config=config, window_size=window_size,
        )
        for removed in removal_sets
    ]
    evaluation.write_report_json(reports, out)
    if markdown_out:
        Path(markdown_out).write_text(evaluation.format_markdown_table(reports),
                                      encoding="utf-8")
    if csv_out:
        evaluation.write_report_csv(reports, csv_out)
    click.echo(f"wrote {out} ({len(reports)} rows)")


@main.command("export-weak-labels")
@data_option
@taxonomy_option
@click.option("--seed", default=0, show_default=True)
@train_options
@click.option("--out", required=True, type=click.Path())
@domain_errors
def export_weak_labels_cmd(data, taxonomy_path, seed, learning_rate, epochs,
                           hidden, dropout, select, out):
    """Train a co-category GCN and export weak labels for every paper."""
    records, taxonomy = _load(data, taxonomy_path)
    graph = evaluation.build_graph(records, "cocategory", taxonomy)
    config = _base_config("cocategory", learning_rate, epochs, hidden, dropout, select, seed)
    run = gcn.train(graph, config, taxonomy)
    labels = weaklabel.generate_weak_labels(run, graph, taxonomy)
    weaklabel.write_weak_labels(labels, out)
    report = weaklabel.audit(labels, records)
    click.echo(f"wrote {out}; agreement with ground truth {report.agreement:.3f}")


@main.command("export-embeddings")
@data_option
@taxonomy_option
@graph_option
@window_option
@click.option("--remove", default=None)
@click.option("--seed", default=0, show_default=True)
@train_options
@click.option("--out-prefix", required=True, type=click.Path())
@domain_errors
def export_embeddings_cmd(data, taxonomy_path, graph_kind, window_size, remove, seed,
                          learning_rate, epochs, hidden, dropout, select, out_prefix):
    """Export hidden representations (and a 2-D PCA projection) for plotting."""
    records, taxonomy = _load(data, taxonomy_path)
    graph = evaluation.build_graph(records, graph_kind, taxonomy,
                                   parse_removed(remove), window_size)
    config = _base_config(graph_kind, learning_rate, epochs, hidden, dropout, select, seed)
    run = gcn.train(graph, config, taxonomy)
    model = run.selected_model()
    a_hat = graphs.normalize(graph).matrix
    pred = gcn.predict(model, a_hat, graph.features.values)
    prefix = Path(out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    gcn.export_embeddings_csv(graph.node_ids, graph.labels, pred.hidden,
                              f"{prefix}.embeddings.csv")
    gcn.export_pca_csv(graph.node_ids, graph.labels, pred.hidden,
                       f"{prefix}.pca.csv")
    click.echo(f"wrote {prefix}.embeddings.csv and {prefix}.pca.csv")


@main.command("judge")
@data_option
@taxonomy_option
@click.option("--hints", default="off", show_default=True, type=click.Choice(["on", "off"]))
@click.option("--transport", "transport_kind", default="replay", show_default=True,
              type=click.Choice(["live", "replay"]))
@click.option("--fixtures", "fixtures_dir", type=click.Path(), default=None,
              help="Replay source; with --transport live, responses are recorded here.")
@click.option("--repetitions", default=llmjudge.DEFAULT_REPETITIONS, show_default=True)
@click.option("--max-in-flight", default=1, show_default=True)
@click.option("--out", required=True, type=click.Path())
@domain_errors
def judge_cmd(data, taxonomy_path, hints, transport_kind, fixtures_dir,
              repetitions, max_in_flight, out):
    """Zero-/few-shot classification via a chat-completion service or fixtures."""
    records, taxonomy = _load(data, taxonomy_path)
    spec = llmjudge.PromptSpec.from_taxonomy(taxonomy, with_hints=hints == "on")
    if transport_kind == "replay":
        if not fixtures_dir:
            raise SurveyTaxError("--transport replay requires --fixtures")
        transport = llmjudge.ReplayTransport(fixtures_dir)
    else:
        transport = llmjudge.HttpChatTransport()
        if fixtures_dir:
            transport = llmjudge.RecordingTransport(transport, fixtures_dir)
    run = llmjudge.judge(records, spec, transport, taxonomy,
                         repetitions=repetitions, max_in_flight=max_in_flight)
    llmjudge.write_judge_report(run, out)
    agg = run.aggregate
    click.echo(f"accuracy {100 * agg['accuracy']['mean']:.2f} "
               f"({100 * agg['accuracy']['std']:.2f}) over {repetitions} repetitions")


if __name__ == "__main__":
    main()
