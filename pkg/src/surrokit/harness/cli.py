"""Command-line entry points.

Verbs: ``dataset gen``, ``surrogate fit-rbfn``, ``surrogate eval``,
``optimize run``, ``report tables``, ``report uncertainty``, ``serve mock``.
Flags mirror the ExperimentConfig fields; a JSON config file, when given,
overrides flags. Exit codes: 0 success, 2 configuration error, 3 surrogate
unavailable.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from ..errors import ConfigError, RemoteUnavailable
from ..problems import make_suite
from ..reporting import markdown_table, save_convergence_grid, write_csv, write_markdown
from ..surrogate import RbfnSurrogate, mock_serve
from .config import ExperimentConfig
from .dataset import fit_arrays_for_tasks, generate_dataset, load_dataset
from .evaluate import run_surrogate_eval, run_uncertainty_study
from .optimize import build_surrogate, run_optimization

EXIT_CONFIG = 2
EXIT_SURROGATE = 3


def _config_from(ctx_params: dict, config_file: str | None) -> ExperimentConfig:
    flags = {k: v for k, v in ctx_params.items() if k not in ("config", "out")}
    if "seeds" in flags and flags["seeds"] is not None:
        flags["seeds"] = tuple(int(s) for s in str(flags["seeds"]).split(",") if s != "")
    try:
        return ExperimentConfig.from_sources(flags, config_file)
    except ConfigError as err:
        click.echo(f"config error: {err}", err=True)
        sys.exit(EXIT_CONFIG)


def _common_options(fn):
    options = [
        click.option("--suite", default=None, help="MCF1 | MCF2 | MCF3 | manipulator"),
        click.option("--samples-per-task", "samples_per_task", type=int, default=None),
        click.option("--gamma", type=int, default=None),
        click.option("--k-min", "k_min", type=int, default=None),
        click.option("--k-max", "k_max", type=int, default=None),
        click.option("--template", default=None),
        click.option("--n-tasks", "n_tasks", type=int, default=None),
        click.option("--seed", type=int, default=None),
        click.option("--config", type=click.Path(exists=True), default=None,
                     help="JSON config; file values override flags"),
    ]
    for opt in reversed(options):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Many-task surrogate optimization toolkit."""


@main.group()
def dataset():
    """Offline dataset commands."""


@dataset.command("gen")
@_common_options
@click.option("--out", required=True, type=click.Path(), help="output directory")
def dataset_gen(out, config, **params):
    """Sample, evaluate and encode an offline dataset."""
    cfg = _config_from(params, config)
    t0 = time.time()
    manifest = generate_dataset(cfg, out)
    click.echo(
        f"wrote {manifest['records']} records "
        f"({manifest['train']} train / {manifest['test']} test) "
        f"to {out} in {time.time() - t0:.1f}s"
    )
    if manifest["encode_failures"]:
        click.echo(f"encode failures: {manifest['encode_failures']}", err=True)


@main.group()
def surrogate():
    """Surrogate fitting and evaluation."""


@surrogate.command("fit-rbfn")
@_common_options
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--n-centers", "n_centers", type=int, default=None)
@click.option("--out", required=True, type=click.Path(), help="output .npz model file")
def surrogate_fit_rbfn(out, config, dataset_path, **params):
    """Fit one RBFN per task from the offline dataset."""
    cfg = _config_from(params, config)
    tasks = make_suite(cfg.suite, n_tasks=cfg.n_tasks, seed=cfg.seed)
    records = load_dataset(dataset_path)
    arrays = fit_arrays_for_tasks(records, tasks)
    model = RbfnSurrogate.fit_from_dataset(arrays, n_centers=cfg.n_centers, seed=cfg.seed)
    model.save(out)
    click.echo(f"fitted {len(arrays)} task models -> {out}")


@surrogate.command("eval")
@_common_options
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--surrogate", "surrogate", default=None,
              help="rbfn | remote | mock | exact")
@click.option("--model-path", "model_path", type=click.Path(exists=True), default=None)
@click.option("--remote-url", "remote_url", default=None)
@click.option("--noise-sigma-rel", "noise_sigma_rel", type=float, default=None)
@click.option("--out", required=True, type=click.Path())
@click.option("--figures/--no-figures", default=True)
def surrogate_eval(out, config, dataset_path, figures, **params):
    """Per-task sMAE and R^2 of a surrogate on the test split."""
    cfg = _config_from(params, config)
    tasks = make_suite(cfg.suite, n_tasks=cfg.n_tasks, seed=cfg.seed)
    try:
        surr = build_surrogate(cfg, tasks, dataset_path)
        rows = run_surrogate_eval(dataset_path, surr, cfg, out_dir=out, figures=figures)
    except RemoteUnavailable as err:
        click.echo(f"surrogate unavailable: {err}", err=True)
        sys.exit(EXIT_SURROGATE)
    macro = rows[-1]
    click.echo(f"macro sMAE={macro['smae']} R2={macro['r2']} -> {out}")


@main.group()
def optimize():
    """Surrogate-driven optimization runs."""


@optimize.command("run")
@_common_options
@click.option("--surrogate", "surrogate", default=None)
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), default=None)
@click.option("--model-path", "model_path", type=click.Path(exists=True), default=None)
@click.option("--remote-url", "remote_url", default=None)
@click.option("--noise-sigma-rel", "noise_sigma_rel", type=float, default=None)
@click.option("--seeds", default=None, help="comma-separated optimizer seeds")
@click.option("--pop-size", "pop_size", type=int, default=None)
@click.option("--generations", type=int, default=None)
@click.option("--out", required=True, type=click.Path())
@click.option("--figures/--no-figures", default=True)
def optimize_run(out, config, dataset_path, figures, **params):
    """Run MaTDE under the configured surrogate, one run per seed."""
    cfg = _config_from(params, config)
    try:
        summary = run_optimization(cfg, out, dataset_path=dataset_path, figures=figures)
    except RemoteUnavailable as err:
        click.echo(f"surrogate unavailable: {err}", err=True)
        sys.exit(EXIT_SURROGATE)
    except (ConfigError, ValueError) as err:
        click.echo(f"config error: {err}", err=True)
        sys.exit(EXIT_CONFIG)
    means = summary["mean_true_y"]
    click.echo(f"{len(means)} tasks, mean final true fitness "
               f"{np.mean(list(means.values())):.4g} -> {out}")


@main.group()
def report():
    """Re-render tables and figures from stored runs."""


@report.command("tables")
@click.option("--run", "run_dir", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None, help="defaults to the run dir")
@click.option("--figures/--no-figures", default=True)
def report_tables(run_dir, out, figures):
    """Rebuild the markdown summary (and figures) from a run manifest."""
    run_dir = Path(run_dir)
    out = Path(out) if out else run_dir
    manifest = json.loads((run_dir / "run_manifest.json").read_text())
    finals = manifest["finals"]
    header = ["task_id", "mean_true_y", "std_true_y", "runs"]
    rows = [
        [tid, float(np.mean(v)), float(np.std(v)), len(v)] for tid, v in finals.items()
    ]
    write_csv(out / "report_tables.csv", header, rows)
    write_markdown(
        out / "report_tables.md",
        f"Run report: {manifest['config']['suite']} / {manifest['config']['surrogate']}",
        markdown_table(header, rows, bold_min_columns=(1,)),
    )
    if figures:
        traces = {}
        for trace_file in sorted(run_dir.glob("trace_seed*.csv")):
            for line in trace_file.read_text().splitlines()[1:]:
                task, gen, best, calls = line.split(",")
                traces.setdefault(task, {}).setdefault(trace_file.name, []).append(
                    (int(gen), float(best), int(calls))
                )
        if traces:
            save_convergence_grid(
                out / "report_convergence.png",
                {t: list(by_seed.values()) for t, by_seed in traces.items()},
                "best pseudo-fitness per generation",
            )
    click.echo(f"report written to {out}")


@report.command("uncertainty")
@_common_options
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--surrogate", "surrogate", default="remote")
@click.option("--remote-url", "remote_url", default=None)
@click.option("--noise-sigma-rel", "noise_sigma_rel", type=float, default=None)
@click.option("--limit", type=int, default=2000)
@click.option("--decode", "decode_strategy", default="beam",
              help="decode strategy for the study (beam gives all five scores)")
@click.option("--out", required=True, type=click.Path())
@click.option("--figures/--no-figures", default=True)
def report_uncertainty(out, config, dataset_path, limit, decode_strategy, figures, **params):
    """Correlate uncertainty scores with absolute prediction error."""
    from ..surrogate import DecodeSpec, RemoteSurrogate

    cfg = _config_from(params, config)
    tasks = make_suite(cfg.suite, n_tasks=cfg.n_tasks, seed=cfg.seed)
    try:
        if cfg.surrogate == "remote":
            surr = RemoteSurrogate(
                endpoint=cfg.remote_url,
                gamma=cfg.gamma,
                template=cfg.template,
                decode=DecodeSpec(strategy=decode_strategy),
                return_probs=True,
            )
        else:
            surr = _uncertainty_mock(cfg, tasks, decode_strategy)
        result = run_uncertainty_study(
            dataset_path, surr, cfg, limit=limit, out_dir=out, figures=figures
        )
    except RemoteUnavailable as err:
        click.echo(f"surrogate unavailable: {err}", err=True)
        sys.exit(EXIT_SURROGATE)
    ent = result["criteria"]["ent"]
    click.echo(f"{result['n_queries']} queries; spearman(ent)={ent['spearman']} -> {out}")


def _uncertainty_mock(cfg, tasks, decode_strategy):
    from ..codec import CodecConfig
    from ..prompts import PromptTemplate, render_metadata
    from ..surrogate import DecodeSpec, MockMetaModel

    codec = CodecConfig(gamma=cfg.gamma, k_min=cfg.k_min, k_max=cfg.k_max)
    model = MockMetaModel(tasks, noise_sigma_rel=cfg.noise_sigma_rel, codec=codec, seed=cfg.seed)
    spec = DecodeSpec(strategy=decode_strategy)

    class _Wrapper:
        def predict(self, meta, x):
            text = render_metadata(meta, PromptTemplate(cfg.template))
            return model.answer(text, x, decode=spec, return_probs=True)

        def predict_batch(self, meta, xs):
            return [self.predict(meta, x) for x in xs]

    return _Wrapper()


@main.group()
def serve():
    """Serving commands."""


@serve.command("mock")
@_common_options
@click.option("--noise-sigma-rel", "noise_sigma_rel", type=float, default=None)
@click.option("--port", type=int, default=8034)
def serve_mock(config, port, **params):
    """Serve the hermetic mock model over the wire protocol (blocks)."""
    cfg = _config_from(params, config)
    tasks = make_suite(cfg.suite, n_tasks=cfg.n_tasks, seed=cfg.seed)
    from ..codec import CodecConfig

    codec = CodecConfig(gamma=cfg.gamma, k_min=cfg.k_min, k_max=cfg.k_max)
    server = mock_serve(tasks, noise_sigma_rel=cfg.noise_sigma_rel, port=port,
                        seed=cfg.seed, codec=codec)
    click.echo(f"mock server for {cfg.suite} on {server.url} (Ctrl-C to stop)")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        server.stop()


if __name__ == "__main__":
    main()
