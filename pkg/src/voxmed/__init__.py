"""Respiratory-sound diagnosis: WAV ingestion, embeddings, classifier, service."""

__version__ = "0.1.0"

from .audio_io import AudioClip, parse_wav, resample, to_mono
from .classifier import ArchSpec, ModelParams, forward, load_params, predict_recording, save_params
from .dataset import LabeledDataset, LabelScheme, build_dataset, load_scheme
from .dsp import FeatureMatrix, MelConfig, fit_length, log_mel_spectrogram
from .embedding import Backend, BackendConfig, Embedding, load_backend
from .errors import VoxmedError
from .evaluation import EvaluationReport, evaluate, run_ablation
from .service import create_app
from .training import TrainConfig, train

__all__ = [
    "AudioClip", "parse_wav", "resample", "to_mono",
    "ArchSpec", "ModelParams", "forward", "load_params", "predict_recording", "save_params",
    "LabeledDataset", "LabelScheme", "build_dataset", "load_scheme",
    "FeatureMatrix", "MelConfig", "fit_length", "log_mel_spectrogram",
    "Backend", "BackendConfig", "Embedding", "load_backend",
    "VoxmedError",
    "EvaluationReport", "evaluate", "run_ablation",
    "create_app",
    "TrainConfig", "train",
    "__version__",
]
