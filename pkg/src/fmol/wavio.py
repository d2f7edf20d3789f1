"""Minimal WAV I/O: 16-bit PCM via the stdlib wave module.

Output files carry exactly the standard RIFF/WAVE fmt + data chunks.
"""

from __future__ import annotations

import wave

import numpy as np


def write_wav(path, audio: np.ndarray, sample_rate: int) -> None:
    """Write float audio in [-1, 1] as 16-bit PCM.

    audio is (n,) mono or (n, channels); values are clipped then rounded,
    so equal input always produces byte-identical files.
    """
    data = np.asarray(audio, dtype=np.float64)
    if data.ndim == 1:
        data = data[:, None]
    channels = data.shape[1]
    clipped = np.clip(data, -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype(np.int16)
    with wave.open(str(path), "wb") as w:
        w.setnchannels(channels)
        w.setsampwidth(2)
        w.setframerate(sample_rate)
        w.writeframes(pcm.tobytes())


def read_wav_mono(path) -> tuple[np.ndarray, int]:
    """Read a 16-bit PCM WAV as mono float64 in [-1, 1] (channels averaged)."""
    with wave.open(str(path), "rb") as w:
        if w.getsampwidth() != 2:
            raise ValueError("only 16-bit PCM WAV is supported")
        sr = w.getframerate()
        channels = w.getnchannels()
        raw = w.readframes(w.getnframes())
    pcm = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if channels > 1:
        pcm = pcm.reshape(-1, channels).mean(axis=1)
    return pcm, sr
