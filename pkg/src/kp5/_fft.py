"""Thin FFT layer over :mod:`scipy.fft`.

scipy caches plans per (shape, dtype) internally, so repeated transforms of
the same size in the stepper reuse them. ``KP5_THREADS`` caps the worker
count handed to scipy.
"""

from __future__ import annotations

import os

import scipy.fft as _sf


def workers() -> int:
    raw = os.environ.get("KP5_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def fft2(a, axes=(-2, -1)):
    return _sf.fft2(a, axes=axes, workers=workers())


def ifft2(a, axes=(-2, -1)):
    return _sf.ifft2(a, axes=axes, workers=workers())


def rfft2(a, axes=(-2, -1)):
    return _sf.rfft2(a, axes=axes, workers=workers())


def irfft2(a, s, axes=(-2, -1)):
    return _sf.irfft2(a, s=s, axes=axes, workers=workers())


def fft(a, axis=-1):
    return _sf.fft(a, axis=axis, workers=workers())


def ifft(a, axis=-1):
    return _sf.ifft(a, axis=axis, workers=workers())


def fftn(a, axes=None):
    return _sf.fftn(a, axes=axes, workers=workers())


def ifftn(a, axes=None):
    return _sf.ifftn(a, axes=axes, workers=workers())
