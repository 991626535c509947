"""Numerical tolerances and deterministic random streams."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ToleranceConfig:
    """Tolerances threaded through every rank/residual decision.

    Attributes
    ----------
    rank_tol:
        Absolute singular-value threshold below which a singular value is
        treated as zero (rank decisions, kernel extraction).
    residual_tol:
        Largest residual norm accepted when certifying an identity, e.g.
        ``|f(X) - X|`` at a claimed fixed point.
    fd_step:
        Step size for finite-difference derivative checks.
    """

    rank_tol: float = 1e-9
    residual_tol: float = 1e-8
    fd_step: float = 1e-6

    def __post_init__(self):
        if self.rank_tol < 0:
            raise ValueError(f"rank_tol must be >= 0, got {self.rank_tol}")
        if self.residual_tol <= 0:
            raise ValueError(f"residual_tol must be > 0, got {self.residual_tol}")
        if self.fd_step <= 0:
            raise ValueError(f"fd_step must be > 0, got {self.fd_step}")


DEFAULT_TOL = ToleranceConfig()


def child_rng(seed: int, label: str, index: int = 0) -> np.random.Generator:
    """Derive an independent random generator from ``(seed, label, index)``.

    Streams for different labels or indices are statistically independent,
    and every stream is a pure function of its arguments, so any sampled
    quantity can be reproduced in isolation. The label is hashed (SHA-256)
    into a spawn key, which keeps the mapping stable across platforms and
    numpy versions.
    """
    digest = hashlib.sha256(f"{label}#{index}".encode()).digest()
    spawn_key = tuple(int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4))
    seq = np.random.SeedSequence(entropy=seed, spawn_key=spawn_key)
    return np.random.default_rng(seq)
