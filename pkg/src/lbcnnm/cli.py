"""Command-line interface.

Exit codes: 0 on success, 1 on fatal errors, 2 when some series failed but the
run completed.
"""

import json
import sys

import click
import numpy as np

from .benchmark import BenchmarkConfig, run_benchmark
from .convolution import conv_matrix
from .datasets import load_dataset
from .diagnostics import coherence_report, spectrum_summary
from .forecasters import (
    forecast_baseline,
    forecast_cnnm,
    forecast_lbcnnm,
    forecast_missing,
    forecast_multi_kernel,
)
from .model_selection import estimate_model_size
from .transform import learn_pca, learn_pcp, save_transform

METHODS = ("lbcnnm", "cnnm", "naive", "average", "drift", "lsr", "exps")


@click.group()
def main():
    """Convolutional nuclear-norm forecasting toolkit."""


def _load(input_path, fmt, horizon, test=None, category=None):
    loaded = load_dataset(input_path, fmt=fmt, horizon=horizon,
                          test_path=test, category=category)
    if not loaded.series:
        raise click.ClickException("no usable series in the input")
    return loaded


def _mask_table(mask_path):
    """Mask CSV rows: series id followed by 1-based missing history positions."""
    table = {}
    with open(mask_path) as fh:
        for line in fh:
            cells = [c.strip() for c in line.strip().split(",") if c.strip()]
            if not cells:
                continue
            table[cells[0]] = [int(c) for c in cells[1:]]
    return table


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["m4", "simple"]), default="simple")
@click.option("--horizon", type=int, default=None)
@click.option("--category", default=None)
@click.option("--method", type=click.Choice(METHODS), default="lbcnnm")
@click.option("--multi-kernel", is_flag=True, help="Emit min/max interval envelopes.")
@click.option("--mask", "mask_path", type=click.Path(exists=True), default=None,
              help="CSV of per-series 1-based missing history positions.")
@click.option("--output", "output_path", required=True, type=click.Path())
def forecast(input_path, fmt, horizon, category, method, multi_kernel, mask_path, output_path):
    """Forecast every series in a CSV and write a JSON report."""
    loaded = _load(input_path, fmt, horizon, category=category)
    masks = _mask_table(mask_path) if mask_path else {}
    rows, failures = [], 0
    for series in sorted(loaded.series, key=lambda s: s.id):
        try:
            if series.id in masks:
                missing = np.zeros(series.length, dtype=bool)
                missing[[p - 1 for p in masks[series.id]]] = True
                report = forecast_missing(series, missing)
            elif multi_kernel and method == "lbcnnm":
                lower, upper, _, report = forecast_multi_kernel(series)
                report.diagnostics = {
                    "interval_lower": [float(v) - series.shift for v in lower],
                    "interval_upper": [float(v) - series.shift for v in upper],
                }
            elif method == "lbcnnm":
                report = forecast_lbcnnm(series)
            elif method == "cnnm":
                report = forecast_cnnm(series)
            else:
                report = forecast_baseline(series, method)
        except Exception as exc:
            click.echo(f"series {series.id} failed: {exc}", err=True)
            failures += 1
            continue
        row = report.to_dict()
        # reports leave the ingestion shift behind: forecasts in original scale
        row["forecast"] = [v - series.shift for v in row["forecast"]]
        rows.append(row)
        if report.flags:
            failures += 1
    with open(output_path, "w") as fh:
        json.dump({"series": rows, "load_errors": loaded.errors}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(f"wrote {len(rows)} forecasts to {output_path}")
    if failures or loaded.errors:
        sys.exit(2)


@main.command()
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--test", "test_path", type=click.Path(exists=True), default=None)
@click.option("--category", default=None)
@click.option("--horizon", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["m4", "simple"]), default="m4")
@click.option("--methods", default="naive,average,lbcnnm")
@click.option("--ablation", is_flag=True)
@click.option("--missing-rate", type=float, default=0.0)
@click.option("--seed", type=int, default=0)
@click.option("--parallelism", type=int, default=1)
@click.option("--dump-figures", is_flag=True)
@click.option("--report", "report_path", required=True, type=click.Path())
def benchmark(train_path, test_path, category, horizon, fmt, methods, ablation,
              missing_rate, seed, parallelism, dump_figures, report_path):
    """Run the benchmark harness and write JSON + CSV reports."""
    config = BenchmarkConfig(
        train_path=train_path, test_path=test_path, fmt=fmt, category=category,
        horizon=horizon, methods=tuple(m.strip() for m in methods.split(",") if m.strip()),
        ablation=ablation, missing_rate=missing_rate, rng_seed=seed,
        parallelism=parallelism, output_path=report_path, dump_figures=dump_figures,
    )
    report = run_benchmark(config)
    for method, agg in report["aggregates"].items():
        click.echo(
            f"{method}: mean sMAPE={_fmt(agg['mean_smape'])} "
            f"mean NRMSE={_fmt(agg['mean_nrmse'])} over {agg['n_scored']} series"
        )
    failed = [row for row in report["series"] if row["flags"]]
    if failed or report["load_errors"]:
        sys.exit(2)


def _fmt(v):
    return "n/a" if v is None else f"{v:.2f}"


@main.command("learn-transform")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["m4", "simple"]), default="simple")
@click.option("--horizon", type=int, default=1)
@click.option("--model-size", type=int, required=True)
@click.option("--algo", type=click.Choice(["pca", "pcp"]), default="pcp")
@click.option("--output", "output_path", required=True, type=click.Path())
def learn_transform(input_path, fmt, horizon, model_size, algo, output_path):
    """Learn a transform from the first series' window matrix and save it."""
    from .augmentation import generation_matrix

    loaded = _load(input_path, fmt, horizon)
    series = loaded.series[0]
    if model_size > series.length:
        raise click.ClickException("model size exceeds the series length")
    Y = generation_matrix(series.values, model_size)
    model = learn_pca(Y) if algo == "pca" else learn_pcp(Y)
    save_transform(model, output_path)
    click.echo(f"saved {algo} transform ({model.q} x {model.m}) to {output_path}")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["m4", "simple"]), default="simple")
@click.option("--horizon", type=int, default=None)
@click.option("--category", default=None)
@click.option("--model-size", type=int, default=None)
@click.option("--kernel", type=int, default=None)
def diagnose(input_path, fmt, horizon, category, model_size, kernel):
    """Print spectrum and coherence diagnostics for each series."""
    from .augmentation import generation_matrix

    loaded = _load(input_path, fmt, horizon, category=category)
    for series in loaded.series:
        y, h = series.values, series.horizon
        if model_size is None:
            m = estimate_model_size(y, h).chosen_m
        else:
            m = model_size
        G0 = generation_matrix(y, m)
        summary = spectrum_summary(G0)
        model = learn_pcp(G0)
        k = kernel or model.q
        window = np.zeros(m)
        window[: m - h] = y[-(m - h):]
        coh = coherence_report(model, window, k, h)
        click.echo(f"series {series.id}: l={y.size} h={h} m={m}")
        click.echo(
            f"  window spectrum: rank={summary.numerical_rank} "
            f"entropy={summary.entropy:.4f} gini={summary.gini:.4f}"
        )
        click.echo(
            f"  coherences: conv_rank={coh.conv_rank} mu_A={coh.mu_A:.3f} "
            f"mu2(Az)={coh.conv_mu2:.3f} mu_bar={coh.mu_bar_A:.3f} mu_tilde={coh.mu_tilde_A:.3f}"
        )


if __name__ == "__main__":
    main()
