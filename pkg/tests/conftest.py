import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from voxmed.classifier import ArchSpec, save_params
from voxmed.dataset import build_dataset, load_scheme
from voxmed.embedding import BackendConfig, load_backend
from voxmed.evaluation import _embed_dataset
from voxmed.training import TrainConfig, train

REPO_ROOT = Path(__file__).resolve().parent.parent

FIXTURE_DIM = 32
FIXTURE_ARCH = ArchSpec(input_dim=FIXTURE_DIM, conv_layers=((8, 3), (8, 3)),
                        pool_size=2, dropout_rate=0.2, num_classes=3)


@pytest.fixture(scope="session")
def mini_corpus_dir() -> Path:
    path = REPO_ROOT / "data" / "mini_corpus"
    assert path.is_dir(), "bundled mini corpus missing; run scripts/make_mini_corpus.py"
    return path


@pytest.fixture(scope="session")
def diagnoses_path(mini_corpus_dir) -> Path:
    return mini_corpus_dir / "diagnoses.csv"


@pytest.fixture(scope="session")
def fixture_backend_cfg() -> BackendConfig:
    return BackendConfig(kind="deterministic_test", embedding_dim=FIXTURE_DIM)


@pytest.fixture(scope="session")
def fixture_model_path(tmp_path_factory, mini_corpus_dir, diagnoses_path,
                       fixture_backend_cfg) -> Path:
    """Small model trained on the mini corpus, shared across service/CLI tests."""
    scheme = load_scheme("3class")
    backend = load_backend(fixture_backend_cfg)
    dataset = build_dataset(mini_corpus_dir, diagnoses_path, scheme)
    pairs = _embed_dataset(backend, dataset)
    params, _ = train(pairs, FIXTURE_ARCH, TrainConfig(max_epochs=12, batch_size=4, seed=3))
    path = tmp_path_factory.mktemp("model") / "fixture.vxmd"
    save_params(params, path)
    return path
