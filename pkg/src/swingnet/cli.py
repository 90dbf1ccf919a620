"""Command-line entry point.

Every subcommand writes its outputs plus a ``manifest.json`` (config echo,
SHA-256 digests of inputs and outputs, library versions) into
``--output-dir``. Wall-clock data lives only under the manifest's
``timestamp`` key, so two identical runs differ in nothing else.

Any flag can also be set through the environment as
``SWINGNET_<SUBCOMMAND>_<FLAG>``, e.g. ``SWINGNET_PIPELINE_FDR=0.1``.

Exit codes: 0 success, 2 usage error, 3 invalid configuration, 4 missing
input, 5 solver did not converge, 6 malformed or unusable data.
"""
from __future__ import annotations

import hashlib
import json
import platform
import sys
import time
from datetime import datetime, timezone
from importlib.metadata import version
from pathlib import Path

import click
import numpy as np
import scipy

from . import __version__
from .bicm import ConvergenceError, DegreeSequenceError, SolverConfig, load_solution, save_solution, solve_bicm
from .bigraph import EmptyInputError, GraphValidationError, degrees, read_bipartite_edgelist, read_weighted_edgelist
from .community import (EmptyGraphError, NoSeedsError, PropagationConfig, louvain, propagate_labels,
                        write_assignment)
from .pipeline import run as stages
from .pipeline.bots import TooFewScoresError
from .pipeline.networks import NoRetweetsError, read_label_map, seeds_from_communities
from .pipeline.records import IngestFormatError
from .projval import read_projection, validate_projection, write_projection
from .synthgen import PlantedBipartiteSpec, ScenarioSpec, gen_planted_bipartite, gen_synthetic_dataset

EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_MISSING = 4
EXIT_CONVERGENCE = 5
EXIT_DATA = 6

DATA_ERRORS = (IngestFormatError, EmptyInputError, GraphValidationError, DegreeSequenceError, NoRetweetsError,
               stages.PipelineError, TooFewScoresError, NoSeedsError, EmptyGraphError)


class CliFailure(click.ClickException):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.exit_code = code


def config_error(msg: str) -> CliFailure:
    return CliFailure(f"invalid configuration: {msg}", EXIT_CONFIG)


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def require_inputs(*paths) -> None:
    for p in paths:
        if p is not None and not Path(p).is_file():
            raise CliFailure(f"missing input: {p}", EXIT_MISSING)


def parse_thresholds(text):
    if text is None:
        return None
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise config_error(f"--bot-thresholds expects 'lo,hi', got {text!r}") from None
    if not 0 <= lo < hi <= 1:
        raise config_error("--bot-thresholds must satisfy 0 <= lo < hi <= 1")
    return lo, hi


def parse_labels(text):
    if text is None:
        return None
    labels = tuple(sorted({s.strip() for s in text.split(",") if s.strip()}))
    if not labels:
        raise config_error("--political-labels is empty")
    return labels


def check_fdr(fdr):
    if not 0 < fdr < 1:
        raise config_error(f"--fdr must lie strictly between 0 and 1, got {fdr}")


def check_tolerance(tol):
    if not tol > 0:
        raise config_error(f"--tolerance must be positive, got {tol}")


def check_threads(n):
    if n < 1:
        raise config_error(f"--threads must be at least 1, got {n}")


def write_manifest(out_dir: Path, command: str, config: dict, inputs: dict, outputs, timings: dict) -> None:
    manifest = {
        "command": command,
        "config": config,
        "inputs": {name: {"path": str(p), "sha256": sha256(p)} for name, p in inputs.items() if p is not None},
        "outputs": {name: sha256(out_dir / name) for name in sorted(outputs)},
        "versions": {"swingnet": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "click": version("click"), "python": platform.python_version()},
        "timestamp": timings,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


class Timer:
    def __init__(self):
        self.started = datetime.now(timezone.utc).isoformat(timespec="seconds")
        self.t0 = time.perf_counter()

    def done(self, **extra) -> dict:
        return {"started": self.started, "elapsed_s": round(time.perf_counter() - self.t0, 3), **extra}


def run_guarded(fn):
    """Map library exceptions onto the documented exit codes."""
    try:
        return fn()
    except click.ClickException:
        raise
    except FileNotFoundError as exc:
        raise CliFailure(f"missing input: {exc.filename}", EXIT_MISSING) from exc
    except ConvergenceError as exc:
        raise CliFailure(f"solver did not converge: {exc}", EXIT_CONVERGENCE) from exc
    except DATA_ERRORS as exc:
        raise CliFailure(f"data error: {exc}", EXIT_DATA) from exc
    except (KeyError, ValueError) as exc:
        raise CliFailure(f"data error: {exc}", EXIT_DATA) from exc


def output_dir_option(f):
    return click.option("--output-dir", required=True, type=click.Path(file_okay=False, path_type=Path),
                        help="Directory for outputs and manifest.json.")(f)


def input_option(help_text):
    return click.option("--input", "input_path", required=True, type=click.Path(path_type=Path), help=help_text)


tolerance_option = click.option("--tolerance", default=1e-8, show_default=True, type=float,
                                help="BiCM solver tolerance on the max degree error.")
fdr_option = click.option("--fdr", default=0.05, show_default=True, type=float,
                          help="Benjamini-Hochberg false discovery rate.")
threads_option = click.option("--threads", default=1, show_default=True, type=int,
                              help="Worker threads for p-value computation; results do not depend on it.")
seed_option = click.option("--seed", default=0, show_default=True, type=int, help="Seed for every random step.")
resolution_option = click.option("--resolution", default=1.0, show_default=True, type=float,
                                 help="Louvain resolution parameter.")


@click.group(context_settings={"auto_envvar_prefix": "SWINGNET", "help_option_names": ["-h", "--help"]})
@click.version_option(__version__)
def cli():
    """Validated bipartite projections and swing-state tweet analysis."""


@cli.command()
@input_option("Bipartite edge list (top<TAB>bottom per line).")
@output_dir_option
@tolerance_option
@click.option("--max-iterations", default=10000, show_default=True, type=int, help="Solver iteration budget.")
def solve(input_path, output_dir, tolerance, max_iterations):
    """Fit the BiCM to the degrees of a bipartite graph."""
    check_tolerance(tolerance)
    if max_iterations < 1:
        raise config_error("--max-iterations must be at least 1")
    require_inputs(input_path)
    timer = Timer()

    def work():
        g, _, _ = read_bipartite_edgelist(input_path)
        return solve_bicm(degrees(g), SolverConfig(tolerance=tolerance, max_iterations=max_iterations))

    sol = run_guarded(work)
    output_dir.mkdir(parents=True, exist_ok=True)
    save_solution(output_dir / "bicm.json", sol)
    write_manifest(output_dir, "solve", {"tolerance": tolerance, "max_iterations": max_iterations}, {"input": input_path}, ["bicm.json"],
                   timer.done())
    click.echo(f"residual {sol.residual:.3e} after {sol.iterations} iterations")


@cli.command()
@input_option("Bipartite edge list; the projection is onto the first column.")
@output_dir_option
@click.option("--solution", type=click.Path(path_type=Path), default=None,
              help="Reuse a BiCM solution written by 'solve' instead of fitting one.")
@fdr_option
@tolerance_option
@threads_option
def validate(input_path, output_dir, solution, fdr, tolerance, threads):
    """Statistically validated projection of the top layer."""
    check_fdr(fdr)
    check_tolerance(tolerance)
    check_threads(threads)
    require_inputs(input_path, solution)
    timer = Timer()

    def work():
        g, top, _ = read_bipartite_edgelist(input_path)
        sol = load_solution(solution) if solution else solve_bicm(degrees(g), SolverConfig(tolerance=tolerance))
        return validate_projection(g, sol, fdr, threads=threads), top

    proj, top = run_guarded(work)
    output_dir.mkdir(parents=True, exist_ok=True)
    write_projection(output_dir / "projection.tsv", proj, top.ids)
    write_manifest(output_dir, "validate", {"fdr": fdr, "tolerance": tolerance},
                   {"input": input_path, "solution": solution}, ["projection.tsv"], timer.done(threads=threads))
    click.echo(f"{len(proj.edges)} of {proj.tested} co-occurring pairs validated")


@cli.command()
@input_option("Validated projection written by 'validate'.")
@output_dir_option
@resolution_option
@seed_option
@click.option("--retweets", type=click.Path(path_type=Path), default=None,
              help="Weighted edge list to propagate community labels over.")
@click.option("--label-map", type=click.Path(path_type=Path), default=None,
              help="CSV community_id,label,political_flag naming the seeded communities.")
def communities(input_path, output_dir, resolution, seed, retweets, label_map):
    """Louvain communities of a projection, optionally propagated over a second graph."""
    if not resolution > 0:
        raise config_error(f"--resolution must be positive, got {resolution}")
    require_inputs(input_path, retweets, label_map)
    timer = Timer()

    def work():
        proj = read_projection(input_path)
        if not proj.edges:
            raise stages.PipelineError("projection has no edges")
        return louvain(proj.to_graph(), resolution, seed)

    comm = run_guarded(work)
    ids = _projection_ids(input_path, len(comm))
    output_dir.mkdir(parents=True, exist_ok=True)
    write_assignment(output_dir / "communities.tsv", comm, ids)
    outputs = ["communities.tsv"]
    if retweets is not None:
        def propagate():
            rt, users = read_weighted_edgelist(retweets, directed=True)
            lm = read_label_map(label_map) if label_map else None
            seeds = seeds_from_communities({i: str(c) for i, c in zip(ids, comm.labels)}, lm)
            seed_idx = {users[u]: lab for u, lab in seeds.items() if u in users}
            return propagate_labels(rt, seed_idx, PropagationConfig(rng_seed=seed)), users

        labels, users = run_guarded(propagate)
        write_assignment(output_dir / "labels.tsv", labels, users.ids)
        outputs.append("labels.tsv")
    write_manifest(output_dir, "communities", {"resolution": resolution, "seed": seed},
                   {"input": input_path, "retweets": retweets, "label_map": label_map}, outputs, timer.done())
    click.echo(f"{len(comm.communities())} communities")


def _projection_ids(path, node_count) -> list:
    """Node names from a projection file header, falling back to indices."""
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline()[2:])
    return header.get("node_ids") or [str(i) for i in range(node_count)]


def _pipeline_config(fdr, tolerance, resolution, seed, threads, political_labels, bot_thresholds, fmt,
                     label_map, tags, expansion) -> stages.PipelineConfig:
    check_fdr(fdr)
    check_tolerance(tolerance)
    check_threads(threads)
    if not resolution > 0:
        raise config_error(f"--resolution must be positive, got {resolution}")
    return stages.PipelineConfig(
        fdr_level=fdr, tolerance=tolerance, resolution=resolution, rng_seed=seed, threads=threads,
        political_labels=parse_labels(political_labels), bot_thresholds=parse_thresholds(bot_thresholds),
        input_format=fmt, label_map=str(label_map) if label_map else None,
        tag_table=str(tags) if tags else None, expansion_table=str(expansion) if expansion else None)


def _config_echo(cfg: stages.PipelineConfig) -> dict:
    d = cfg.echo()
    d.pop("threads")  # outputs are identical for any thread count
    return d


format_option = click.option("--format", "fmt", type=click.Choice(["jsonl", "csv"]), default="jsonl",
                             show_default=True, help="Tweet record file format.")
political_option = click.option("--political-labels", default=None,
                                help="Comma-separated labels kept as political (default: flags in the label map).")
bot_thresholds_option = click.option("--bot-thresholds", default=None,
                                     help="Fixed 'lo,hi' bot-score cut points instead of deciles.")
tags_option = click.option("--tags", type=click.Path(path_type=Path), default=None,
                           help="CSV domain,tag reputation table.")
expansion_option = click.option("--expansion", type=click.Path(path_type=Path), default=None,
                                help="CSV short_url,long_url expansion table.")


@cli.command()
@input_option("Tweet records (JSONL or CSV).")
@output_dir_option
@format_option
@fdr_option
@tolerance_option
@resolution_option
@seed_option
@threads_option
@political_option
@bot_thresholds_option
@click.option("--label-map", type=click.Path(path_type=Path), default=None,
              help="CSV community_id,label,political_flag.")
@tags_option
@expansion_option
def pipeline(input_path, output_dir, fmt, fdr, tolerance, resolution, seed, threads, political_labels,
             bot_thresholds, label_map, tags, expansion):
    """Run every stage from raw tweets to the report tables."""
    cfg = _pipeline_config(fdr, tolerance, resolution, seed, threads, political_labels, bot_thresholds, fmt,
                           label_map, tags, expansion)
    require_inputs(input_path, label_map, tags, expansion)
    timer = Timer()
    tables, diag = run_guarded(lambda: stages.run_pipeline(input_path, output_dir, cfg))
    outputs = [stages.COMPLETE, stages.BIPARTITE, stages.RETWEETS, stages.BICM, stages.PROJECTION,
               stages.COMMUNITIES, stages.LABELS, stages.VALIDATED, stages.BOT_CLASSES, "report.json",
               "report.txt", "fig_url_categories.csv", "stages.json"]
    write_manifest(output_dir, "pipeline", _config_echo(cfg),
                   {"input": input_path, "label_map": label_map, "tags": tags, "expansion": expansion},
                   outputs, timer.done(threads=threads))
    click.echo(tables.render_text(), nl=False)


@cli.command()
@input_option("State-associated tweet records to tabulate (e.g. 07_validated.jsonl).")
@output_dir_option
@format_option
@bot_thresholds_option
@tags_option
@expansion_option
@click.option("--complete", type=click.Path(path_type=Path), default=None,
              help="Unfiltered records, adding a 'complete' stage to the figure data.")
def report(input_path, output_dir, fmt, bot_thresholds, tags, expansion, complete):
    """Report tables for records that already passed the filters."""
    cfg = stages.PipelineConfig(bot_thresholds=parse_thresholds(bot_thresholds), input_format=fmt,
                                tag_table=str(tags) if tags else None,
                                expansion_table=str(expansion) if expansion else None)
    require_inputs(input_path, tags, expansion, complete)
    timer = Timer()
    output_dir.mkdir(parents=True, exist_ok=True)

    def work():
        validated = input_path
        if fmt == "csv":  # stage_report reads JSONL
            from .pipeline.records import ingest_tweets, write_records
            recs, _ = ingest_tweets(input_path, "csv")
            validated = output_dir / "input_records.jsonl"
            write_records(validated, recs)
        return stages.stage_report(output_dir, cfg, validated_path=validated, complete_path=complete)

    tables = run_guarded(work)
    write_manifest(output_dir, "report", _config_echo(cfg),
                   {"input": input_path, "tags": tags, "expansion": expansion, "complete": complete},
                   [stages.BOT_CLASSES, "report.json", "report.txt", "fig_url_categories.csv"], timer.done())
    click.echo(tables.render_text(), nl=False)


@cli.command()
@output_dir_option
@seed_option
@click.option("--kind", type=click.Choice(["scenario", "planted"]), default="scenario", show_default=True,
              help="Tweet-corpus scenario, or a planted two-block bipartite graph.")
@click.option("--n-tweets", default=100_000, show_default=True, type=int, help="Scenario size.")
@click.option("--p-in", default=0.3, show_default=True, type=float, help="Planted within-block link probability.")
@click.option("--p-out", default=0.02, show_default=True, type=float, help="Planted cross-block link probability.")
@click.option("--blocks", default="20x200,20x200", show_default=True,
              help="Planted block sizes as comma-separated TOPxBOTTOM.")
def gen(output_dir, seed, kind, n_tweets, p_in, p_out, blocks):
    """Generate synthetic data with planted ground truth."""
    timer = Timer()
    if kind == "scenario":
        try:
            spec = ScenarioSpec(n_tweets=n_tweets, rng_seed=seed)
        except ValueError as exc:
            raise config_error(str(exc)) from exc
        run_guarded(lambda: gen_synthetic_dataset(spec, output_dir))
        outputs = ["tweets.jsonl", "truth.json", "tags.csv", "expansion.csv", "label_map.csv"]
        config = spec.to_dict()
    else:
        try:
            sizes = tuple(tuple(int(v) for v in b.lower().split("x")) for b in blocks.split(","))
            spec = PlantedBipartiteSpec(sizes, p_in, p_out, seed)
        except ValueError as exc:
            raise config_error(str(exc)) from exc
        planted = gen_planted_bipartite(spec)
        output_dir.mkdir(parents=True, exist_ok=True)
        g = planted.graph
        with open(output_dir / "bipartite.tsv", "w", encoding="utf-8", newline="\n") as fh:
            for i, a in g.edges().tolist():
                fh.write(f"t{i}\tb{a}\n")
        truth = {"top_block": planted.top_block.tolist(), "bottom_block": planted.bottom_block.tolist(),
                 "top_degrees": planted.top_degrees.tolist(), "bottom_degrees": planted.bottom_degrees.tolist()}
        (output_dir / "truth.json").write_text(json.dumps(truth) + "\n", encoding="utf-8")
        outputs = ["bipartite.tsv", "truth.json"]
        config = {"blocks": [list(b) for b in sizes], "p_in": p_in, "p_out": p_out, "rng_seed": seed}
    write_manifest(output_dir, "gen", {"kind": kind, **config}, {}, outputs, timer.done())
    click.echo(f"wrote {', '.join(outputs)} to {output_dir}")


def main(argv=None) -> int:
    """Run the CLI and return its exit status instead of exiting."""
    try:
        cli.main(args=argv, prog_name="swingnet", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
