"""Raw bytes to embeddings: the shared preprocessing path."""

import numpy as np
import pytest

from helpers import pcm16_payload, build_wav, fmt_chunk, tone, tone_wav
from voxmed.audio_io import TARGET_RATE
from voxmed.dsp import MelConfig
from voxmed.embedding import BackendConfig, load_backend, source_hash
from voxmed.errors import ClipTooLong, MalformedHeader
from voxmed.pipeline import (
    chunk_embeddings,
    embed_file,
    feature_chunks,
    prepare_clip,
    recording_embedding,
)


@pytest.fixture(scope="module")
def backend():
    return load_backend(BackendConfig(kind="deterministic_test", embedding_dim=24))


class TestPrepareClip:
    def test_mono_16k_output(self):
        clip = prepare_clip(tone_wav(440.0, 44100, 0.5))
        assert clip.channels == 1
        assert clip.sample_rate == TARGET_RATE
        assert abs(clip.duration_s - 0.5) < 0.01

    def test_stereo_collapsed(self):
        samples = tone(300.0, 8000, 0.25)
        stereo = np.stack([samples, samples], axis=1).reshape(-1)
        data = build_wav(pcm16_payload(stereo, channels=2),
                         fmt=fmt_chunk(channels=2, rate=8000))
        clip = prepare_clip(data)
        assert clip.channels == 1
        assert clip.sample_rate == TARGET_RATE

    def test_over_long_rejected(self):
        data = tone_wav(100.0, 4000, 2.0)
        with pytest.raises(ClipTooLong):
            prepare_clip(data, max_duration_s=1.0)

    def test_garbage_raises_typed(self):
        with pytest.raises(MalformedHeader):
            prepare_clip(b"not audio")


class TestFeatureChunks:
    def test_one_second_single_chunk(self):
        clip = prepare_clip(tone_wav(440.0, 16000, 1.0))
        chunks = feature_chunks(clip, target_frames=1024)
        assert len(chunks) == 1
        assert chunks[0].values.shape == (1024, 128)

    def test_standardized_stats(self):
        clip = prepare_clip(tone_wav(440.0, 16000, 1.0))
        values = feature_chunks(clip, target_frames=98)[0].values
        # 98 native frames for 1 s: no padding, so stats survive exactly
        assert abs(float(values.mean())) < 1e-9
        assert abs(float(values.std()) - 1.0) < 1e-9

    def test_silence_skips_standardization(self):
        data = build_wav(pcm16_payload(np.zeros(16000)), fmt=fmt_chunk(rate=16000))
        clip = prepare_clip(data)
        chunks = feature_chunks(clip, target_frames=98)
        assert float(np.std(chunks[0].values)) == 0.0  # constant floor, untouched

    def test_long_clip_multiple_chunks(self):
        clip = prepare_clip(tone_wav(440.0, 16000, 3.0))
        chunks = feature_chunks(clip, target_frames=100)
        assert len(chunks) == 3  # 298 native frames -> ceil(298 / 100)
        for c in chunks:
            assert c.values.shape == (100, 128)

    def test_custom_mel_config(self):
        clip = prepare_clip(tone_wav(440.0, 16000, 0.5))
        cfg = MelConfig(n_mels=32)
        chunks = feature_chunks(clip, mel_cfg=cfg, target_frames=48)
        assert chunks[0].values.shape == (48, 32)


class TestEmbeddingPaths:
    def test_chunk_embeddings_shape_and_hash(self, backend):
        data = tone_wav(440.0, 16000, 1.0)
        embeddings = chunk_embeddings(backend, data)
        assert len(embeddings) == 1
        assert embeddings[0].values.shape == (24,)
        assert embeddings[0].source_hash == source_hash(data)

    def test_recording_embedding_is_chunk_mean(self, backend):
        data = tone_wav(350.0, 16000, 2.5)
        per_chunk = chunk_embeddings(backend, data, target_frames=100)
        assert len(per_chunk) > 1
        mean = np.mean([e.values.astype(np.float64) for e in per_chunk], axis=0)
        rec = recording_embedding(backend, data, target_frames=100)
        np.testing.assert_array_equal(rec.values, mean.astype(np.float32))

    def test_deterministic_across_calls(self, backend):
        data = tone_wav(200.0, 22050, 0.8)
        a = recording_embedding(backend, data)
        b = recording_embedding(backend, data)
        assert a.values.tobytes() == b.values.tobytes()

    def test_content_sensitivity(self, backend):
        a = recording_embedding(backend, tone_wav(200.0, 16000, 0.5))
        b = recording_embedding(backend, tone_wav(201.0, 16000, 0.5))
        assert a.values.tobytes() != b.values.tobytes()

    def test_embed_file_matches_bytes(self, backend, tmp_path):
        data = tone_wav(440.0, 16000, 0.6)
        path = tmp_path / "clip.wav"
        path.write_bytes(data)
        from_file = embed_file(backend, path)
        from_bytes = recording_embedding(backend, data)
        assert from_file.values.tobytes() == from_bytes.values.tobytes()
