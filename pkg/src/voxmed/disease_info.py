"""Disease descriptions attached to predictions.

Two providers sit behind one interface: an optional external HTTP endpoint
queried with a short timeout, and a bundled offline dictionary covering
every class the shipped label schemes can emit. Any external failure falls
back to the bundle, and the result records which source actually answered.
"""

from __future__ import annotations

import datetime
import threading
from dataclasses import dataclass

import httpx

from .errors import UnknownDisease

EXTERNAL_TIMEOUT_S = 2.0

_BUNDLED = {
    "healthy": {
        "name": "Healthy",
        "summary": "No respiratory ailment detected in this recording. Lung sounds "
                   "are consistent with normal breathing.",
        "symptoms": [],
    },
    "copd": {
        "name": "COPD",
        "summary": "Chronic obstructive pulmonary disease: persistent airflow "
                   "limitation, usually progressive and associated with long-term "
                   "exposure to irritants such as tobacco smoke.",
        "symptoms": ["shortness of breath", "chronic cough", "sputum production",
                     "wheezing", "chest tightness"],
    },
    "urti": {
        "name": "URTI",
        "summary": "Upper respiratory tract infection: an acute infection of the "
                   "nose, sinuses, pharynx, or larynx, most often viral and "
                   "self-limiting.",
        "symptoms": ["sore throat", "runny or blocked nose", "sneezing", "cough",
                     "mild fever", "headache"],
    },
    "lrti": {
        "name": "LRTI",
        "summary": "Lower respiratory tract infection: infection below the larynx, "
                   "including bronchitis and pneumonia, ranging from mild to severe.",
        "symptoms": ["productive cough", "fever", "breathlessness", "chest pain",
                     "fatigue"],
    },
    "bronchitis": {
        "name": "Bronchitis",
        "summary": "Inflammation of the bronchial tubes. Covers bronchiectasis "
                   "(permanent airway widening with mucus build-up) and "
                   "bronchiolitis (small-airway inflammation, common in infants).",
        "symptoms": ["persistent cough", "mucus production", "wheezing",
                     "low fever", "chest discomfort"],
    },
    "others": {
        "name": "Other respiratory condition",
        "summary": "The recording matches a respiratory condition outside the "
                   "named classes of this model (for example pneumonia, asthma, "
                   "or bronchiolitis). Clinical follow-up is advised.",
        "symptoms": ["cough", "abnormal breath sounds", "breathlessness"],
    },
}


@dataclass(frozen=True)
class DiseaseInfo:
    name: str
    summary: str
    symptoms: tuple
    source: str  # external_api or bundled
    retrieved_at: str

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "summary": self.summary,
            "symptoms": list(self.symptoms),
            "source": self.source,
            "retrieved_at": self.retrieved_at,
        }


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def bundled_info(label: str) -> DiseaseInfo | None:
    entry = _BUNDLED.get(label.strip().lower())
    if entry is None:
        return None
    return DiseaseInfo(name=entry["name"], summary=entry["summary"],
                       symptoms=tuple(entry["symptoms"]), source="bundled",
                       retrieved_at=_now())


class DiseaseInfoProvider:
    """Fetch disease info, preferring the external endpoint when configured.

    Lookups are cached; the cache is last-writer-wins under concurrent use.
    """

    def __init__(self, external_url: str | None = None, timeout_s: float = EXTERNAL_TIMEOUT_S):
        self.external_url = external_url.rstrip("/") if external_url else None
        self.timeout_s = timeout_s
        self._cache: dict = {}
        self._lock = threading.Lock()

    def _fetch_external(self, label: str) -> DiseaseInfo | None:
        if not self.external_url:
            return None
        try:
            resp = httpx.get(f"{self.external_url}/{label}", timeout=self.timeout_s)
            if resp.status_code != 200:
                return None
            payload = resp.json()
            return DiseaseInfo(
                name=str(payload["name"]),
                summary=str(payload.get("summary", "")),
                symptoms=tuple(str(s) for s in payload.get("symptoms", [])),
                source="external_api",
                retrieved_at=_now(),
            )
        except (httpx.HTTPError, KeyError, ValueError, TypeError):
            return None

    def get(self, label: str) -> DiseaseInfo:
        key = label.strip().lower()
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached
        info = self._fetch_external(label) or bundled_info(label)
        if info is None:
            raise UnknownDisease(f"no disease information available for {label!r}")
        with self._lock:
            self._cache[key] = info
        return info


def get_disease_info(label: str, provider: DiseaseInfoProvider | None = None) -> DiseaseInfo:
    return (provider or DiseaseInfoProvider()).get(label)
