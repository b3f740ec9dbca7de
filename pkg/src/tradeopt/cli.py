"""Command-line front end.

Subcommands: gen, estimate, optimize, sweep, bound, calibrate. Every output
embeds the library version, the resolved configuration, and its SHA-256 hash
(JSON documents under a "meta" key, CSV files as leading '#' comment lines),
so any run can be reproduced bit for bit. Output files are written in one
shot after the computation succeeds; failures leave no partial files. The
seed falls back to the TRADEOPT_SEED environment variable.
"""

from __future__ import annotations

import dataclasses
import functools
import hashlib
import json
import math
import os
from pathlib import Path

import click

from . import __version__
from .calibrate import (
    fit_lambda,
    read_granularity_csv,
    read_levels_csv,
    read_scale_csv,
    sensitivity_to_bits,
)
from .empirical import SmoothingConfig
from .errors import TradeoptError
from .events import EventLog, format_log, infer_schema, parse_log
from .fixtures import default_model
from .models import JointModel, generate_synthetic, load_model
from .objectives import CostMetric, ObjectiveProvider, ObjectiveSpec, SamplingPlan
from .optimize import (
    LlsConfig,
    Selection,
    constrained_max_utility,
    exhaustive,
    greedy,
    lazy_greedy,
    lls,
    online_bound,
    sweep_lambda,
)
from .schema import read_sensitivity_csv, write_sensitivity_csv

DEFAULT_SAMPLES = 1000
CURVE_HEADER = (
    "lambda,attrs,utility_bits,identifiability,sensitivity_bits,"
    "objective,upper_bound,eval_count"
)


def _handled(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except click.ClickException:
            raise
        except (TradeoptError, ValueError, OSError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _resolve_seed(seed: int | None) -> int | None:
    if seed is not None:
        return seed
    env = os.environ.get("TRADEOPT_SEED")
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise click.UsageError(f"TRADEOPT_SEED must be an integer, got {env!r}")


def _parse_attrs(text: str) -> tuple[str, ...]:
    text = text.strip()
    if not text:
        return ()
    parts = text.split("+") if "+" in text else text.split(",")
    names = tuple(p.strip() for p in parts)
    if any(not p for p in names):
        raise click.UsageError(f"empty attribute name in {text!r}")
    return names


def _parse_grid(text: str) -> list[float]:
    import numpy as np

    t = text.strip()
    if t.startswith(("log:", "lin:")):
        try:
            kind, lo, hi, num = t.split(":")
            lo, hi, num = float(lo), float(hi), int(num)
        except ValueError:
            raise click.UsageError(f"grid must look like log:0.1:100:25, got {text!r}")
        if num < 1:
            raise click.UsageError("grid needs at least one point")
        if num > 1 and not lo < hi:
            raise click.UsageError("grid endpoints must satisfy lo < hi")
        if kind == "log":
            if lo <= 0:
                raise click.UsageError("log grids need lo > 0")
            values = np.geomspace(lo, hi, num)
        else:
            values = np.linspace(lo, hi, num)
        return [float(v) for v in values]
    try:
        values = [float(v) for v in t.split(",")]
    except ValueError:
        raise click.UsageError(f"grid values must be numbers, got {text!r}")
    return values


def _load_source(log_path, model_path, sens_path):
    if log_path is None and model_path is None:
        raise click.UsageError("provide --log and/or --model")
    model = None
    if model_path is not None:
        if model_path == "default":
            model = default_model()
        else:
            model = load_model(model_path)
    if log_path is not None:
        text = Path(log_path).read_text(encoding="utf-8")
        # a model given alongside a log contributes its schema (domains and
        # sensitivities); otherwise the schema is inferred from the log itself
        schema = model.schema if model is not None else infer_schema(text)
        source = parse_log(text, schema)
    else:
        source = model
    if sens_path is not None:
        table = read_sensitivity_csv(Path(sens_path).read_text(encoding="utf-8"))
        schema = source.schema.with_sensitivities(table)
        if isinstance(source, EventLog):
            source = EventLog(
                schema,
                source.user_ids,
                source.query_ids,
                source.intent_ids,
                source.values,
                source.user_labels,
                source.query_labels,
                source.intent_labels,
            )
        else:
            source = dataclasses.replace(source, schema=schema)
    return source


def _build_spec(log_path, model_path, sens_path, alpha, lam, metric,
                exact, samples, eps, delta, seed):
    """Resolve source + mode flags into an ObjectiveSpec and a config dict."""
    source = _load_source(log_path, model_path, sens_path)
    metric_obj = CostMetric.parse(metric)
    if exact and (samples is not None or eps is not None or delta is not None):
        raise click.UsageError("--exact conflicts with --samples/--eps/--delta")
    if samples is not None and (eps is not None or delta is not None):
        raise click.UsageError("give --samples or --eps/--delta, not both")
    if (eps is None) != (delta is None):
        raise click.UsageError("--eps and --delta must be given together")
    config = {
        "log": log_path,
        "model": model_path,
        "sens": sens_path,
        "alpha": alpha,
        "lambda": lam,
        "metric": str(metric_obj),
    }
    plan = None
    if isinstance(source, JointModel):
        if samples is not None or eps is not None:
            raise click.UsageError(
                "model sources are evaluated exactly; drop --samples/--eps/--delta"
            )
        config.update(mode="exact", seed=None)
    elif exact:
        config.update(mode="exact", seed=None)
    else:
        resolved = _resolve_seed(seed)
        if resolved is None:
            raise click.UsageError("sampled mode requires --seed or TRADEOPT_SEED")
        if eps is not None:
            plan = SamplingPlan(seed=resolved, epsilon=eps, delta=delta)
            config.update(mode="sampled", epsilon=eps, delta=delta, seed=resolved)
        else:
            n = DEFAULT_SAMPLES if samples is None else samples
            plan = SamplingPlan(seed=resolved, n_samples=n)
            config.update(mode="sampled", n_samples=n, seed=resolved)
    spec = ObjectiveSpec(
        source=source,
        lam=lam,
        metric=metric_obj,
        smoothing=SmoothingConfig(alpha=alpha),
        plan=plan,
    )
    return spec, config


def _meta(command: str, config: dict) -> dict:
    cfg_json = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return {
        "command": command,
        "config": config,
        "config_sha256": hashlib.sha256(cfg_json.encode("utf-8")).hexdigest(),
        "seed": config.get("seed"),
        "version": __version__,
    }


def _json_safe(x):
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _emit(text: str, out: str | None):
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}")


def _emit_json(meta: dict, payload: dict, out: str | None):
    doc = _json_safe({"meta": meta, **payload})
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", out)


def _meta_lines(meta: dict) -> list[str]:
    cfg = json.dumps(meta["config"], sort_keys=True, separators=(",", ":"))
    return [
        f"# tradeopt {meta['version']}",
        f"# command {meta['command']}",
        f"# seed {meta['seed']}",
        f"# config {cfg}",
        f"# config_sha256 {meta['config_sha256']}",
    ]


def _emit_csv(meta: dict, rows: list[str], out: str | None):
    _emit("\n".join(_meta_lines(meta) + rows) + "\n", out)


def _curve_row(lam: float, sel: Selection) -> str:
    ev = sel.evaluation
    bound = "" if sel.upper_bound is None else repr(sel.upper_bound)
    return (
        f"{lam!r},{'+'.join(sel.chosen)},{ev.utility!r},{ev.identifiability!r},"
        f"{ev.sensitivity!r},{ev.objective!r},{bound},{sel.eval_count}"
    )


def _source_options(f):
    opts = [
        click.option("--log", "log_path", type=click.Path(exists=True, dir_okay=False),
                     help="Event-log CSV."),
        click.option("--model", "model_path",
                     help="Model spec JSON, or 'default' for the bundled demo model. "
                          "With --log, contributes the schema."),
        click.option("--sens", "sens_path", type=click.Path(exists=True, dir_okay=False),
                     help="Sensitivity CSV (attribute,sensitivity_bits) overriding the schema."),
        click.option("--alpha", type=click.FloatRange(min=0), default=0.1,
                     show_default=True,
                     help="Additive smoothing for log-derived distributions."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _mode_options(f):
    opts = [
        click.option("--exact", is_flag=True, help="Evaluate on the full source."),
        click.option("--samples", type=click.IntRange(min=1),
                     help=f"Sampled mode with this many rows (default {DEFAULT_SAMPLES})."),
        click.option("--eps", type=float, help="Sampled mode target absolute error."),
        click.option("--delta", type=float, help="Sampled mode failure probability."),
        click.option("--seed", type=int, help="RNG seed (fallback: TRADEOPT_SEED)."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="tradeopt")
def main():
    """Pick which user attributes to share: utility vs identifiability."""


@main.command()
@click.option("--model", "model_path", default="default", show_default=True,
              help="Model spec JSON, or 'default' for the bundled demo model.")
@click.option("--n", "n_records", type=click.IntRange(min=1), required=True,
              help="Number of log rows to draw.")
@click.option("--seed", type=int, help="RNG seed (fallback: TRADEOPT_SEED).")
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Output log CSV path.")
@_handled
def gen(model_path, n_records, seed, out):
    """Generate a synthetic event log from a model spec."""
    resolved = _resolve_seed(seed)
    if resolved is None:
        raise click.UsageError("gen requires --seed or TRADEOPT_SEED")
    model = default_model() if model_path == "default" else load_model(model_path)
    log = generate_synthetic(model, n_records, resolved)
    meta = _meta("gen", {"model": model_path, "n": n_records, "seed": resolved})
    text = "\n".join(_meta_lines(meta)) + "\n" + format_log(log)
    Path(out).write_text(text, encoding="utf-8")
    click.echo(f"wrote {n_records} records to {out} (seed {resolved})")


@main.command()
@_source_options
@_mode_options
@click.option("--attrs", required=True,
              help="'+'- or ','-joined attribute names; '' is the empty set.")
@click.option("--metric", default="maxprob", show_default=True,
              help="maxprob | rescaled | kanon:K")
@click.option("--lambda", "lam", type=click.FloatRange(min=0), default=1.0,
              show_default=True, help="Cost conversion factor.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write here instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@_handled
def estimate(log_path, model_path, sens_path, alpha, exact, samples, eps, delta,
             seed, attrs, metric, lam, out, fmt):
    """Evaluate utility, identifiability, and the objective for one subset."""
    spec, config = _build_spec(log_path, model_path, sens_path, alpha, lam,
                               metric, exact, samples, eps, delta, seed)
    names = _parse_attrs(attrs)
    config["attrs"] = list(names)
    meta = _meta("estimate", config)
    ev = ObjectiveProvider(spec).evaluate(names)
    if fmt == "json":
        _emit_json(meta, {"evaluation": ev.to_dict()}, out)
    else:
        rows = [
            "attrs,utility_bits,identifiability,sensitivity_bits,cost,"
            "objective,n_samples_used",
            f"{'+'.join(ev.subset)},{ev.utility!r},{ev.identifiability!r},"
            f"{ev.sensitivity!r},{ev.cost!r},{ev.objective!r},{ev.n_samples_used}",
        ]
        _emit_csv(meta, rows, out)


@main.command()
@_source_options
@_mode_options
@click.option("--metric", default="maxprob", show_default=True,
              help="maxprob | rescaled | kanon:K")
@click.option("--lambda", "lam", type=click.FloatRange(min=0), default=1.0,
              show_default=True, help="Cost conversion factor.")
@click.option("--algo", type=click.Choice(["greedy", "lazy", "lls", "exhaustive"]),
              default="lls", show_default=True)
@click.option("--epsilon", type=float, default=0.01, show_default=True,
              help="Improvement threshold parameter for lls.")
@click.option("--max-passes", type=click.IntRange(min=1),
              help="Pass cap for lls (default 2n).")
@click.option("--k", type=click.IntRange(min=0),
              help="greedy/lazy: rank exactly k attributes (default: all).")
@click.option("--budget", type=click.FloatRange(min=0),
              help="Maximize utility under cost <= budget (lls/exhaustive).")
@click.option("--limit", type=click.IntRange(min=1), default=20, show_default=True,
              help="Largest universe exhaustive search will enumerate.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write here instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@_handled
def optimize(log_path, model_path, sens_path, alpha, exact, samples, eps, delta,
             seed, metric, lam, algo, epsilon, max_passes, k, budget, limit, out, fmt):
    """Search for the attribute subset maximizing the objective."""
    spec, config = _build_spec(log_path, model_path, sens_path, alpha, lam,
                               metric, exact, samples, eps, delta, seed)
    config.update(algo=algo, epsilon=epsilon, k=k, budget=budget)
    meta = _meta("optimize", config)
    lls_config = LlsConfig(epsilon=epsilon, max_passes=max_passes)
    payload: dict
    if budget is not None:
        if algo not in ("lls", "exhaustive"):
            raise click.UsageError("--budget requires --algo lls or exhaustive")
        sel = constrained_max_utility(spec, budget, algorithm=algo,
                                      config=lls_config, limit=limit)
        payload = {"selection": sel.to_dict()}
    elif algo == "lls":
        sel = lls(spec, lls_config)
        payload = {"selection": sel.to_dict()}
    elif algo == "exhaustive":
        sel = exhaustive(spec, limit)
        payload = {"selection": sel.to_dict()}
    else:
        provider = ObjectiveProvider(spec)
        run = lazy_greedy if algo == "lazy" else greedy
        trace = run(provider, "full_F", k)
        # the ranking never stops early; the reported set is its best prefix
        best_i, best_v = None, provider.value(())
        for i, v in enumerate(trace.incremental_values):
            if v > best_v:
                best_i, best_v = i, v
        chosen = trace.order[: best_i + 1] if best_i is not None else ()
        idx = provider.subset_indices(chosen)
        sel = Selection(
            chosen=provider.schema.subset_names(idx),
            evaluation=provider.evaluate(idx),
            algorithm=algo,
            eval_count=provider.eval_count,
        )
        payload = {"selection": sel.to_dict(), "trace": trace.to_dict()}
    if fmt == "json":
        _emit_json(meta, payload, out)
    else:
        _emit_csv(meta, [CURVE_HEADER, _curve_row(spec.lam, sel)], out)


@main.command()
@_source_options
@_mode_options
@click.option("--grid", required=True,
              help="Lambda grid: log:LO:HI:N, lin:LO:HI:N, or comma-separated values.")
@click.option("--metric", default="maxprob", show_default=True,
              help="maxprob | rescaled | kanon:K")
@click.option("--algo", type=click.Choice(["lls", "exhaustive"]), default="lls",
              show_default=True)
@click.option("--epsilon", type=float, default=0.01, show_default=True,
              help="Improvement threshold parameter for lls.")
@click.option("--limit", type=click.IntRange(min=1), default=20, show_default=True,
              help="Largest universe exhaustive search will enumerate.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write here instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@_handled
def sweep(log_path, model_path, sens_path, alpha, exact, samples, eps, delta,
          seed, grid, metric, algo, epsilon, limit, out, fmt):
    """Re-optimize along a lambda grid and emit the tradeoff curve."""
    values = _parse_grid(grid)
    spec, config = _build_spec(log_path, model_path, sens_path, alpha, 0.0,
                               metric, exact, samples, eps, delta, seed)
    del config["lambda"]
    config.update(grid=values, algo=algo, epsilon=epsilon)
    meta = _meta("sweep", config)
    curve = sweep_lambda(spec, values, algorithm=algo,
                         config=LlsConfig(epsilon=epsilon), limit=limit)
    if fmt == "csv":
        _emit_csv(meta, curve.csv_rows(), out)
    else:
        points = [
            {"lambda": lam, "selection": sel.to_dict()} for lam, sel in curve.points
        ]
        _emit_json(meta, {"points": points}, out)


@main.command()
@_source_options
@_mode_options
@click.option("--ref", default="", help="Reference subset ('' = empty set).")
@click.option("--metric", default="maxprob", show_default=True,
              help="maxprob | rescaled | kanon:K")
@click.option("--lambda", "lam", type=click.FloatRange(min=0), default=1.0,
              show_default=True, help="Cost conversion factor.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write here instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@_handled
def bound(log_path, model_path, sens_path, alpha, exact, samples, eps, delta,
          seed, ref, metric, lam, out, fmt):
    """Upper-bound the best achievable objective from a reference subset."""
    spec, config = _build_spec(log_path, model_path, sens_path, alpha, lam,
                               metric, exact, samples, eps, delta, seed)
    names = _parse_attrs(ref)
    config["ref"] = list(names)
    meta = _meta("bound", config)
    value = online_bound(ObjectiveProvider(spec), names)
    if fmt == "json":
        _emit_json(meta, {"bound": value, "reference": list(names), "lambda": lam}, out)
    else:
        rows = ["lambda,reference,bound", f"{lam!r},{'+'.join(names)},{value!r}"]
        _emit_csv(meta, rows, out)


@main.command()
@click.option("--points", "points_path", type=click.Path(exists=True, dir_okay=False),
              help="Granularity CSV 'label,cost,bits' to fit lambda from.")
@click.option("--intercept", is_flag=True,
              help="Also report ordinary least-squares slope/offset diagnostics.")
@click.option("--scale", "scale_path", type=click.Path(exists=True, dir_okay=False),
              help="Level CSV 'level,speedup' (speedup 'never' marks never-share).")
@click.option("--levels", "levels_path", type=click.Path(exists=True, dir_okay=False),
              help="Assignment CSV 'attribute,level'.")
@click.option("--sens-out", "sens_out", type=click.Path(dir_okay=False),
              help="Write the derived sensitivity CSV here.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write here instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@_handled
def calibrate(points_path, intercept, scale_path, levels_path, sens_out, out, fmt):
    """Fit the bits-per-cost factor and map sensitivity levels to bits."""
    if points_path is None and scale_path is None and levels_path is None:
        raise click.UsageError("provide --points and/or --scale with --levels")
    if (scale_path is None) != (levels_path is None):
        raise click.UsageError("--scale and --levels must be given together")
    config = {
        "points": points_path,
        "scale": scale_path,
        "levels": levels_path,
        "intercept": intercept,
    }
    meta = _meta("calibrate", config)
    payload = {}
    result = None
    if points_path is not None:
        result = fit_lambda(read_granularity_csv(points_path), with_intercept=intercept)
        payload["calibration"] = result.to_dict()
    sens_text = None
    if scale_path is not None:
        bits = sensitivity_to_bits(read_scale_csv(scale_path),
                                   read_levels_csv(levels_path))
        payload["sensitivity_bits"] = bits
        sens_text = write_sensitivity_csv(bits)
    if fmt == "json":
        _emit_json(meta, payload, out)
    elif result is not None:
        rows = [
            "lambda,residual,points_used",
            f"{result.lam!r},{result.residual!r},{result.points_used}",
        ]
        _emit_csv(meta, rows, out)
    else:
        raise click.UsageError("csv format requires --points")
    if sens_out is not None and sens_text is not None:
        Path(sens_out).write_text(sens_text, encoding="utf-8")
        click.echo(f"wrote {sens_out}")


if __name__ == "__main__":
    main()
