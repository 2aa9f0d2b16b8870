"""HTTP diagnosis service: upload a recording, get the predicted ailment.

The app is built by a factory so tests and the CLI can wire in their own
model, backend, and scheme. All configuration falls back to environment
variables: VOXMED_MODEL_PATH, VOXMED_BACKEND, VOXMED_SCHEME, VOXMED_PORT,
VOXMED_INFO_URL.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

from fastapi import FastAPI, File, UploadFile
from fastapi.responses import JSONResponse

from .classifier import ModelParams, load_params, predict_recording
from .dataset import LabelScheme, load_scheme
from .disease_info import DiseaseInfoProvider
from .dsp import MelConfig
from .embedding import Backend, BackendConfig, load_backend
from .errors import ShapeMismatch, UnknownDisease, VoxmedError
from .pipeline import chunk_embeddings

MAX_UPLOAD_BYTES = 25 * 1024 * 1024  # fits 120 s of 44.1 kHz stereo PCM16
DEFAULT_PORT = 8080

RUNTIME_ERROR_CODES = {"BackendFailure", "CacheMiss", "ModelFileMissing"}


@dataclass
class ServiceState:
    params: ModelParams | None = None
    backend: Backend | None = None
    scheme: LabelScheme | None = None
    provider: DiseaseInfoProvider | None = None
    mel_cfg: MelConfig | None = None
    started_at: float = 0.0
    boot_error: VoxmedError | None = None

    @property
    def ready(self) -> bool:
        return self.boot_error is None and self.params is not None

    @property
    def model_version(self) -> str:
        return f"vxmd-v{self.params.version}" if self.params else ""


def predict_bytes(state: ServiceState, data: bytes) -> dict:
    """Full pipeline on raw WAV bytes; returns the response document."""
    started = time.perf_counter()
    embeddings = chunk_embeddings(state.backend, data, mel_cfg=state.mel_cfg)
    result = predict_recording(state.params, embeddings)
    label = state.scheme.classes[result.label_index]
    probabilities = {name: float(p) for name, p in zip(state.scheme.classes, result.probs)}
    info = state.provider.get(label)
    return {
        "scheme": state.scheme.name,
        "label": label,
        "probabilities": probabilities,
        "model_version": state.model_version,
        "processing_ms": (time.perf_counter() - started) * 1000.0,
        "disease_info": info.to_dict(),
    }


def _boot_state(model_path, backend_cfg, scheme, info_url, mel_cfg) -> ServiceState:
    state = ServiceState(started_at=time.time(), mel_cfg=mel_cfg)
    try:
        model_path = model_path or os.environ.get("VOXMED_MODEL_PATH", "")
        if backend_cfg is None:
            backend_cfg = BackendConfig(
                kind=os.environ.get("VOXMED_BACKEND", "deterministic_test"),
                model_path=os.environ.get("VOXMED_BACKEND_MODEL") or None,
                cache_dir=os.environ.get("VOXMED_CACHE_DIR") or None,
            )
        if scheme is None or isinstance(scheme, str):
            scheme = load_scheme(scheme or os.environ.get("VOXMED_SCHEME", "3class"))
        info_url = info_url if info_url is not None else os.environ.get("VOXMED_INFO_URL")

        state.params = load_params(model_path)
        state.backend = load_backend(backend_cfg)
        state.scheme = scheme
        state.provider = DiseaseInfoProvider(external_url=info_url)
        if state.params.arch.num_classes != scheme.num_classes:
            raise ShapeMismatch(
                f"model has {state.params.arch.num_classes} classes, "
                f"scheme {scheme.name!r} has {scheme.num_classes}"
            )
        if state.backend.dim != state.params.arch.input_dim:
            raise ShapeMismatch(
                f"backend emits dim {state.backend.dim}, model expects "
                f"{state.params.arch.input_dim}"
            )
    except VoxmedError as exc:
        state.boot_error = exc
        state.params = None
    return state


def _error_response(exc: VoxmedError) -> JSONResponse:
    status = 503 if exc.code in RUNTIME_ERROR_CODES else 400
    return JSONResponse(status_code=status, content={"error": exc.code, "detail": str(exc)})


def create_app(model_path=None, backend_cfg: BackendConfig | None = None,
               scheme: LabelScheme | str | None = None, info_url: str | None = None,
               mel_cfg: MelConfig | None = None,
               max_upload_bytes: int = MAX_UPLOAD_BYTES) -> FastAPI:
    app = FastAPI(title="voxmed", docs_url=None, redoc_url=None)
    state = _boot_state(model_path, backend_cfg, scheme, info_url, mel_cfg)
    app.state.voxmed = state

    @app.post("/api/v1/predict")
    async def predict(audio: UploadFile = File(...)):
        if not state.ready:
            return JSONResponse(status_code=503,
                                content={"error": state.boot_error.code,
                                         "detail": str(state.boot_error)})
        data = await audio.read()
        if len(data) > max_upload_bytes:
            return JSONResponse(status_code=413,
                                content={"error": "PayloadTooLarge",
                                         "detail": f"upload exceeds {max_upload_bytes} bytes"})
        try:
            return predict_bytes(state, data)
        except VoxmedError as exc:
            return _error_response(exc)

    @app.get("/api/v1/diseases/{label}")
    def disease(label: str):
        provider = state.provider or DiseaseInfoProvider()
        try:
            return provider.get(label).to_dict()
        except UnknownDisease as exc:
            return JSONResponse(status_code=404,
                                content={"error": exc.code, "detail": str(exc)})

    @app.get("/api/v1/health")
    def health():
        if not state.ready:
            return JSONResponse(status_code=503,
                                content={"status": "unavailable",
                                         "error": state.boot_error.code,
                                         "detail": str(state.boot_error)})
        return {
            "status": "ok",
            "model_version": state.model_version,
            "backend": state.backend.id,
            "scheme": state.scheme.name,
            "uptime_s": time.time() - state.started_at,
        }

    return app
