"""Command-line entrypoints.

Exit codes: 0 success, 2 usage/config problems, 3 runtime failures.
Every command accepts --config (or the PIONER_CONFIG environment
variable); explicit flags win over config-file values.
"""
from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .backbones import get_adapter
from .config import PRESET_TRAIN_PARAMS, PRESETS, load_config
from .errors import CheckpointError, ConfigError, PionerError, SchemaError, ValidationError

_USAGE_ERRORS = (ConfigError, SchemaError, ValidationError, CheckpointError)


def cli_command(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _USAGE_ERRORS as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(2)
        except PionerError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(3)

    return wrapper


config_option = click.option(
    "--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
    help="Config file (JSON, flat dotted keys).",
)


@click.group()
def main():
    """Patch-centric zero-shot region captioning."""


@main.command("train-decoder")
@config_option
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--mitigation", type=click.Choice(["memory", "noise", "none"]), default="memory")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--epochs", type=int, default=None)
@click.option("--lr", type=float, default=None)
@click.option("--batch", type=int, default=None)
@click.option("--seed", type=int, default=0)
@click.option("--d-model", type=int, default=256)
@click.option("--preset", type=click.Choice(sorted(PRESETS)), default=None)
@cli_command
def train_decoder(config_path, corpus, mitigation, out_path, epochs, lr, batch, seed, d_model, preset):
    """Train the text decoder on a caption corpus (one caption per line)."""
    from .decoder import TrainSpec, save_checkpoint, train
    from .gap import NoiseConfig

    cfg = load_config(config_path, overrides={"gap.preset": preset} if preset else None)
    params = dict(epochs=10, lr=1e-5, batch_size=64)
    if preset:
        params.update(PRESET_TRAIN_PARAMS[preset])
    if epochs is not None:
        params["epochs"] = epochs
    if lr is not None:
        params["lr"] = lr
    if batch is not None:
        params["batch_size"] = batch
    if params["epochs"] < 1:
        raise click.UsageError("--epochs must be >= 1")
    if params["lr"] <= 0:
        raise click.UsageError("--lr must be positive")
    if params["batch_size"] < 1:
        raise click.UsageError("--batch must be >= 1")
    lines = [ln.strip() for ln in Path(corpus).read_text(encoding="utf-8").splitlines()]
    texts = tuple(ln for ln in lines if ln)
    if not texts:
        raise click.UsageError(f"corpus {corpus} holds no captions")
    adapter = get_adapter(cfg)
    spec = TrainSpec(
        corpus=texts,
        mitigation=mitigation,
        noise=NoiseConfig(variance=cfg.gap_sigma2, seed=seed),
        seed=seed,
        d_model=d_model,
        max_len=cfg.decoder_max_len,
        **params,
    )
    ckpt = train(spec, adapter)
    save_checkpoint(ckpt, out_path)
    click.echo(
        f"trained on {len(texts)} captions, final loss "
        f"{ckpt.train_meta['final_loss']:.6f}, wrote {out_path}"
    )


@main.command("build-memory")
@config_option
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--tau", type=float, default=None)
@cli_command
def build_memory_cmd(config_path, corpus, out_path, tau):
    """Embed a text corpus into a projection memory bank."""
    from .gap import build_memory

    cfg = load_config(config_path, overrides={"gap.tau": tau} if tau is not None else None)
    lines = [ln.strip() for ln in Path(corpus).read_text(encoding="utf-8").splitlines()]
    texts = [ln for ln in lines if ln]
    if not texts:
        raise click.UsageError(f"corpus {corpus} holds no texts")
    adapter = get_adapter(cfg)
    bank = build_memory(texts, adapter, tau=cfg.gap_tau, out_path=out_path)
    click.echo(f"memory bank: {len(bank)} texts, dim {bank.dim}, tau {bank.tau}, wrote {out_path}")


def _load_pipeline(cfg, ckpt_path, bank_path, aggregation=None):
    from .decoder import CaptionPipeline, load_checkpoint
    from .gap import load_memory

    checkpoint = load_checkpoint(ckpt_path)
    bank = load_memory(bank_path) if bank_path else None
    adapter = get_adapter(cfg)
    if adapter.name == "synthetic" and adapter.embedding_dim != checkpoint.prefix_dim:
        raise ConfigError(
            f"backbone.dim {adapter.embedding_dim} != checkpoint prefix dim "
            f"{checkpoint.prefix_dim}; set backbone.dim to match"
        )
    return CaptionPipeline(
        adapter,
        checkpoint,
        bank=bank,
        aggregation=aggregation or cfg.aggregation,
        strategy=cfg.decoder_strategy,
        beam_width=cfg.decoder_beam_width,
        max_len=cfg.decoder_max_len,
    )


@main.command("caption")
@config_option
@click.option("--image", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--region", "region_json", required=True, help="Region JSON, or @file.json")
@click.option("--ckpt", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--bank", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--aggregation", type=click.Choice(["uniform", "gaussian", "attention"]), default=None)
@click.option("--weights", "show_weights", is_flag=True, help="Also print selection weights JSON.")
@cli_command
def caption_cmd(config_path, image, region_json, ckpt, bank, aggregation, show_weights):
    """Caption one region of one image."""
    from .regionspec import parse_region_spec

    cfg = load_config(config_path)
    if region_json.startswith("@"):
        region_json = Path(region_json[1:]).read_text(encoding="utf-8")
    spec = parse_region_spec(region_json)
    pipeline = _load_pipeline(cfg, ckpt, bank, aggregation)
    grid, size = pipeline.encode(image)
    caption, selection = pipeline.caption_grid(grid, size, spec, return_selection=True)
    click.echo(caption.text)
    if show_weights:
        click.echo(
            json.dumps({"indices": list(selection.indices), "weights": list(selection.weights)})
        )


@main.command("eval")
@config_option
@click.option("--task", type=click.Choice(["trace", "dense", "region-set", "image"]), required=True)
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--ckpt", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--bank", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--aggregation", type=click.Choice(["uniform", "gaussian", "attention"]), default=None)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None)
@click.option("--dump", "dump_path", type=click.Path(dir_okay=False), default=None)
@click.option("--jobs", type=int, default=None)
@cli_command
def eval_cmd(config_path, task, dataset, ckpt, bank, aggregation, report_path, dump_path, jobs):
    """Run a captioning task over a dataset and print the metric table."""
    from .harness import pipeline_runner, run_task
    from .metrics import SubprocessScorer

    cfg = load_config(config_path)
    pipeline = _load_pipeline(cfg, ckpt, bank, aggregation)
    similarity = None
    if task == "dense" and cfg.metrics_dense_similarity in cfg.plugins:
        similarity = SubprocessScorer(
            cfg.metrics_dense_similarity, cfg.plugins[cfg.metrics_dense_similarity]
        )
    encoder, captioner = pipeline_runner(pipeline)
    report = run_task(
        task,
        dataset,
        encoder,
        captioner,
        similarity=similarity,
        dump_path=dump_path,
        report_path=report_path,
        config_snapshot=cfg.asdict(),
        jobs=jobs or cfg.eval_jobs,
    )
    click.echo(report.table())


@main.group()
def tracebench():
    """Trace-captioning benchmark construction."""


@tracebench.command("build")
@config_option
@click.option("--narratives", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--llm", "llm_url", default=None, help="LLM endpoint URL.")
@click.option("--fixtures", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Recorded LLM fixtures JSON (sentence -> raw output); offline mode.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--retries", type=int, default=None)
@click.option("--stats", "stats_path", type=click.Path(dir_okay=False), default=None)
@cli_command
def tracebench_build(config_path, narratives, llm_url, fixtures, out_path, retries, stats_path):
    """Build the trace benchmark from narrative records."""
    from .tracebench import HTTPLLMClient, RecordedLLMClient, build_benchmark, load_narratives

    cfg = load_config(config_path, overrides={"llm.url": llm_url} if llm_url else None)
    if fixtures:
        client = RecordedLLMClient(json.loads(Path(fixtures).read_text(encoding="utf-8")))
    elif cfg.llm_url:
        client = HTTPLLMClient(cfg.llm_url, timeout=cfg.llm_timeout)
    else:
        raise click.UsageError("provide --llm URL (or llm.url in config) or --fixtures")
    samples, stats = build_benchmark(
        load_narratives(narratives),
        client,
        out_path=out_path,
        retries=retries if retries is not None else cfg.llm_retries,
    )
    if stats_path:
        Path(stats_path).write_text(json.dumps(stats.asdict(), indent=2), encoding="utf-8")
    click.echo(
        f"records {stats.records}, sentences {stats.sentences}, valid {stats.valid}, "
        f"invalid {stats.invalid}, empty traces {stats.empty_traces}, "
        f"llm failures {stats.llm_failures}, discarded images {stats.discarded_images}"
    )


@main.command("serve")
@config_option
@click.option("--port", type=int, default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--ckpt", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--bank", type=click.Path(exists=True, dir_okay=False), default=None)
@cli_command
def serve_cmd(config_path, port, host, ckpt, bank):
    """Run the captioning HTTP service."""
    import uvicorn

    from .decoder import load_checkpoint
    from .gap import load_memory
    from .service import create_app

    cfg = load_config(config_path, overrides={"service.port": port} if port else None)
    checkpoint = load_checkpoint(ckpt) if ckpt else None
    memory = load_memory(bank) if bank else None
    adapter = get_adapter(cfg)
    app = create_app(cfg, adapter, checkpoint=checkpoint, bank=memory)
    uvicorn.run(app, host=host, port=cfg.service_port, log_level="warning")


@main.group()
def convert():
    """Convert upstream annotation formats to task JSONL."""


@convert.command("vg-regions")
@click.option("--src", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@cli_command
def convert_vg(src, out):
    from .harness import convert_vg_regions

    click.echo(f"wrote {convert_vg_regions(src, out)} dense samples to {out}")


@convert.command("karpathy")
@click.option("--src", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--split", default="test")
@cli_command
def convert_karpathy(src, out, split):
    from .harness import convert_karpathy_split

    click.echo(f"wrote {convert_karpathy_split(src, out, split)} image samples to {out}")


@convert.command("entities")
@click.option("--src", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@cli_command
def convert_entities(src, out):
    from .harness import convert_entity_regions

    click.echo(f"wrote {convert_entity_regions(src, out)} region-set samples to {out}")


if __name__ == "__main__":
    main()
