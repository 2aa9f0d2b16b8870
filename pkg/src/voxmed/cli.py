"""Operator command line: train, eval, ablate, predict, serve, embed-cache.

Exit codes: 0 success, 1 usage error, 2 data error (bad input files or
corpus), 3 runtime error (backend or environment). Option values resolve
as flags > environment > config file > defaults; the config file is JSON
with top-level keys model_path, backend, scheme, seed, port, info_url and
nested mel / arch / train sections mirroring the dataclass fields.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import click

from .classifier import ArchSpec, load_params, save_params
from .dataset import bundled_scheme_names, build_dataset, load_scheme
from .disease_info import DiseaseInfoProvider
from .dsp import DEFAULT_TARGET_FRAMES, MelConfig
from .embedding import BackendConfig, load_backend, source_hash, write_embedding_archive
from .errors import FormatError, VoxmedError
from .evaluation import ablation_grid_csv, evaluate, run_ablation
from .pipeline import recording_embedding
from .service import DEFAULT_PORT, ServiceState, create_app, predict_bytes
from .training import TrainConfig, derive_seed, split_dataset, train

RUNTIME_CODES = {
    "ModelFileMissing", "BackendFailure", "CacheMiss", "ShapeMismatch",
    "InvalidArch", "InvalidStd", "UnknownDisease",
}

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


def _load_config_file(path: str | None) -> dict:
    path = path or os.environ.get("VOXMED_CONFIG")
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise FormatError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise FormatError(f"config file {path} is not valid JSON: {exc}")


def _resolve(flag, env_name, file_val, default, cast=lambda v: v):
    """Single-key precedence: flag > env > config file > default."""
    if flag is not None:
        return flag
    if env_name:
        raw = os.environ.get(env_name)
        if raw not in (None, ""):
            return cast(raw)
    if file_val is not None:
        return file_val
    return default


def _mel_config(file_cfg: dict) -> MelConfig | None:
    mel = file_cfg.get("mel")
    return MelConfig(**mel) if mel else None


def _arch_spec(file_cfg: dict, input_dim: int, num_classes: int) -> ArchSpec:
    arch = dict(file_cfg.get("arch", {}))
    arch.pop("input_dim", None)
    arch.pop("num_classes", None)
    if "conv_layers" in arch:
        arch["conv_layers"] = tuple(tuple(layer) for layer in arch["conv_layers"])
    return ArchSpec(input_dim=input_dim, num_classes=num_classes, **arch)


def _train_config(file_cfg: dict, seed, epochs, batch_size, lr) -> TrainConfig:
    base = dict(file_cfg.get("train", {}))
    cfg = TrainConfig(**base)
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if epochs is not None:
        overrides["max_epochs"] = epochs
    if batch_size is not None:
        overrides["batch_size"] = batch_size
    if lr is not None:
        overrides["learning_rate"] = lr
    return replace(cfg, **overrides) if overrides else cfg


def _backend_config(file_cfg: dict, kind, model_path, cache_dir, dim) -> BackendConfig:
    base = dict(file_cfg.get("backend", {}))
    kind = _resolve(kind, "VOXMED_BACKEND", base.get("kind"), "deterministic_test")
    return BackendConfig(
        kind=kind,
        model_path=_resolve(model_path, None, base.get("model_path"), None),
        cache_dir=_resolve(cache_dir, "VOXMED_CACHE_DIR", base.get("cache_dir"), None),
        embedding_dim=_resolve(dim, None, base.get("embedding_dim"), 768, int),
        aggregation=base.get("aggregation", "mean_pool"),
        name=base.get("name", ""),
    )


def _parse_backend_spec(spec: str, dim: int) -> BackendConfig:
    """Parse 'kind' or 'kind:path' ablation backend specs."""
    kind, _, arg = spec.partition(":")
    name = kind if not arg else f"{kind}:{Path(arg).name}"
    if kind == "cache":
        return BackendConfig(kind=kind, cache_dir=arg or None, embedding_dim=dim, name=name)
    if kind == "external_model":
        return BackendConfig(kind=kind, model_path=arg or None, embedding_dim=dim, name=name)
    return BackendConfig(kind=kind, embedding_dim=dim, name=name)


def _embed_pairs(backend, dataset, mel_cfg):
    pairs = []
    for meta, label in dataset.items:
        data = Path(meta.file_path).read_bytes()
        pairs.append((recording_embedding(backend, data, mel_cfg=mel_cfg), label))
    return pairs


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config file; flags and env vars override it.")
@click.pass_context
def cli(ctx, config_path):
    """Respiratory-sound diagnosis toolkit."""
    ctx.obj = _load_config_file(config_path)


@cli.command("train")
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--diagnoses", required=True, type=click.Path())
@click.option("--scheme", default=None, help="Bundled scheme name, alias, or JSON path.")
@click.option("--out", default="run", help="Output base name for .vxmd and .history.csv.")
@click.option("--seed", type=int, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--lr", type=float, default=None)
@click.option("--backend", "backend_kind", default=None)
@click.option("--backend-model", default=None, type=click.Path())
@click.option("--cache-dir", default=None, type=click.Path())
@click.option("--dim", type=int, default=None)
@click.option("--patient-split/--recording-split", default=False,
              help="Hold out whole patients instead of recordings (leakage-safe).")
@click.pass_context
def train_cmd(ctx, data_dir, diagnoses, scheme, out, seed, epochs, batch_size, lr,
              backend_kind, backend_model, cache_dir, dim, patient_split):
    """Train a classifier and write <out>.vxmd plus <out>.history.csv."""
    file_cfg = ctx.obj
    scheme = load_scheme(_resolve(scheme, "VOXMED_SCHEME", file_cfg.get("scheme"), "3class"))
    backend = load_backend(_backend_config(file_cfg, backend_kind, backend_model, cache_dir, dim))
    mel_cfg = _mel_config(file_cfg)
    train_cfg = _train_config(file_cfg, _resolve(seed, None, file_cfg.get("seed"), 0, int),
                              epochs, batch_size, lr)

    dataset = build_dataset(data_dir, diagnoses, scheme)
    pairs = _embed_pairs(backend, dataset, mel_cfg)
    arch = _arch_spec(file_cfg, backend.dim, scheme.num_classes)

    held_out = None
    if patient_split:
        joined = list(zip(dataset.items, pairs))
        kept, held = split_dataset(joined, train_cfg.split_ratio,
                                   derive_seed(train_cfg.seed, "patient-split"),
                                   group_key=lambda j: j[0][0].patient_id)
        pairs = [pair for _, pair in kept]
        held_out = [pair for _, pair in held]
    params, history = train(pairs, arch, train_cfg)

    model_path = f"{out}.vxmd"
    save_params(params, model_path)
    history.to_csv(f"{out}.history.csv")
    final = history.epochs - 1
    click.echo(f"trained {len(pairs)} recordings ({scheme.name}) for {history.epochs} epochs")
    click.echo(f"final val loss {history.val_loss[final]:.4f}, val acc {history.val_acc[final]:.4f}")
    if held_out:
        report = evaluate(params, held_out, scheme_name=scheme.name, class_names=scheme.classes)
        click.echo(f"held-out patients: {len(held_out)} recordings, accuracy {report.accuracy:.4f}")
    click.echo(f"wrote {model_path} and {out}.history.csv")


@cli.command("eval")
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--diagnoses", required=True, type=click.Path())
@click.option("--scheme", default=None)
@click.option("--out", default=None, help="If set, writes <out>.report.csv.")
@click.option("--holdout/--full", default=False,
              help="Score only the seeded 20% split instead of every recording.")
@click.option("--seed", type=int, default=None)
@click.option("--backend", "backend_kind", default=None)
@click.option("--backend-model", default=None, type=click.Path())
@click.option("--cache-dir", default=None, type=click.Path())
@click.option("--dim", type=int, default=None)
@click.pass_context
def eval_cmd(ctx, model_path, data_dir, diagnoses, scheme, out, holdout, seed,
             backend_kind, backend_model, cache_dir, dim):
    """Score a trained model over a labeled directory of recordings."""
    file_cfg = ctx.obj
    scheme = load_scheme(_resolve(scheme, "VOXMED_SCHEME", file_cfg.get("scheme"), "3class"))
    backend = load_backend(_backend_config(file_cfg, backend_kind, backend_model, cache_dir, dim))
    params = load_params(model_path)
    dataset = build_dataset(data_dir, diagnoses, scheme)
    items = dataset.items
    if holdout:
        seed = _resolve(seed, None, file_cfg.get("seed"), 0, int)
        _, items = split_dataset(items, 0.8, derive_seed(seed, "split"))
    report = evaluate(params, items, backend, scheme_name=scheme.name,
                      class_names=scheme.classes)
    click.echo(report.to_text())
    if out:
        report.to_csv(f"{out}.report.csv")
        click.echo(f"wrote {out}.report.csv")


@cli.command("ablate")
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--diagnoses", required=True, type=click.Path())
@click.option("--scheme", "schemes", multiple=True,
              help="Repeatable; defaults to all bundled schemes.")
@click.option("--backend", "backends", multiple=True,
              help="Repeatable 'kind' or 'kind:path'; defaults to deterministic_test.")
@click.option("--seed", type=int, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--lr", type=float, default=None)
@click.option("--dim", type=int, default=None)
@click.option("--out", default="ablation.csv", type=click.Path())
@click.pass_context
def ablate_cmd(ctx, data_dir, diagnoses, schemes, backends, seed, epochs, batch_size,
               lr, dim, out):
    """Train and score every backend x scheme cell; write the grid CSV."""
    file_cfg = ctx.obj
    scheme_names = list(schemes) or bundled_scheme_names()
    scheme_objs = [load_scheme(name) for name in scheme_names]
    dim = _resolve(dim, None, file_cfg.get("backend", {}).get("embedding_dim"), 768, int)
    backend_cfgs = [_parse_backend_spec(s, dim) for s in (backends or ("deterministic_test",))]
    train_cfg = _train_config(file_cfg, _resolve(seed, None, file_cfg.get("seed"), 0, int),
                              epochs, batch_size, lr)
    arch = _arch_spec(file_cfg, dim, 2)

    cells = run_ablation(backend_cfgs, scheme_objs, data_dir, diagnoses,
                         train_cfg=train_cfg, arch=arch)
    grid = ablation_grid_csv(cells)
    Path(out).write_text(grid)
    click.echo(grid.rstrip("\n"))
    click.echo(f"wrote {out}")


@cli.command("predict")
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--scheme", default=None)
@click.option("--info-url", default=None)
@click.option("--backend", "backend_kind", default=None)
@click.option("--backend-model", default=None, type=click.Path())
@click.option("--cache-dir", default=None, type=click.Path())
@click.option("--dim", type=int, default=None)
@click.pass_context
def predict_cmd(ctx, model_path, input_path, scheme, info_url, backend_kind,
                backend_model, cache_dir, dim):
    """Classify one WAV file and print the result document as JSON."""
    file_cfg = ctx.obj
    scheme = load_scheme(_resolve(scheme, "VOXMED_SCHEME", file_cfg.get("scheme"), "3class"))
    backend = load_backend(_backend_config(file_cfg, backend_kind, backend_model, cache_dir, dim))
    params = load_params(model_path)
    info_url = _resolve(info_url, "VOXMED_INFO_URL", file_cfg.get("info_url"), None)
    state = ServiceState(params=params, backend=backend, scheme=scheme,
                         provider=DiseaseInfoProvider(external_url=info_url),
                         mel_cfg=_mel_config(file_cfg))
    doc = predict_bytes(state, Path(input_path).read_bytes())
    click.echo(json.dumps(doc, indent=2))


@cli.command("serve")
@click.option("--model", "model_path", default=None, type=click.Path())
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=None)
@click.option("--scheme", default=None)
@click.option("--info-url", default=None)
@click.option("--backend", "backend_kind", default=None)
@click.option("--backend-model", default=None, type=click.Path())
@click.option("--cache-dir", default=None, type=click.Path())
@click.option("--dim", type=int, default=None)
@click.pass_context
def serve_cmd(ctx, model_path, host, port, scheme, info_url, backend_kind,
              backend_model, cache_dir, dim):
    """Run the HTTP diagnosis service."""
    import uvicorn

    file_cfg = ctx.obj
    port = _resolve(port, "VOXMED_PORT", file_cfg.get("port"), DEFAULT_PORT, int)
    model_path = _resolve(model_path, "VOXMED_MODEL_PATH", file_cfg.get("model_path"), "")
    app = create_app(
        model_path=model_path,
        backend_cfg=_backend_config(file_cfg, backend_kind, backend_model, cache_dir, dim),
        scheme=_resolve(scheme, "VOXMED_SCHEME", file_cfg.get("scheme"), "3class"),
        info_url=_resolve(info_url, "VOXMED_INFO_URL", file_cfg.get("info_url"), None),
        mel_cfg=_mel_config(file_cfg),
    )
    uvicorn.run(app, host=host, port=port)


@cli.command("embed-cache")
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path(), help="Embedding archive to write.")
@click.option("--backend", "backend_kind", default=None)
@click.option("--backend-model", default=None, type=click.Path())
@click.option("--cache-dir", default=None, type=click.Path())
@click.option("--dim", type=int, default=None)
@click.pass_context
def embed_cache_cmd(ctx, data_dir, out, backend_kind, backend_model, cache_dir, dim):
    """Embed every WAV in a directory into a reusable embedding archive."""
    file_cfg = ctx.obj
    backend = load_backend(_backend_config(file_cfg, backend_kind, backend_model, cache_dir, dim))
    mel_cfg = _mel_config(file_cfg)
    data_dir = Path(data_dir)
    wavs = sorted(p for p in data_dir.iterdir() if p.name.lower().endswith(".wav")) \
        if data_dir.is_dir() else []
    if not wavs:
        raise click.UsageError(f"no .wav files under {data_dir}")
    archive = {}
    for path in wavs:
        data = path.read_bytes()
        archive[source_hash(data)] = recording_embedding(backend, data, mel_cfg=mel_cfg)
    write_embedding_archive(out, archive)
    click.echo(f"wrote {len(archive)} embeddings to {out}")


def run_cli(argv=None) -> int:
    """Entry point returning the process exit code instead of raising."""
    try:
        cli.main(args=list(argv) if argv is not None else None, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Exit as exc:
        return EXIT_OK if exc.exit_code == 0 else EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except VoxmedError as exc:
        click.echo(f"error [{exc.code}]: {exc}", err=True)
        return EXIT_RUNTIME if exc.code in RUNTIME_CODES else EXIT_DATA
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        click.echo(f"unexpected error: {exc}", err=True)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
