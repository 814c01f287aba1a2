"""Counter-based Gaussian increments for the coupled simulations.

Reproducibility contract: the increment at (seed, stream, step) is a pure
function of those three integers, independent of how many increments were
consumed before, in what order, or on which thread.  That rules out the
usual sequential generators with rejection-based Gaussian sampling, whose
draw count per variate varies.  Instead each step maps to a fixed pair of
Philox raw words, converted by Box-Muller, which consumes exactly two
words per 2-vector no matter what.  Outputs are bit-stable wherever IEEE
double arithmetic and libm cos/sin/log/sqrt agree.
"""

from __future__ import annotations

import math

import numpy as np

_INV_2_53 = 2.0 ** -53

# stream ids: 0 drives the X increments (B), 1 the extra Y randomness (A)
STREAM_B = 0
STREAM_A = 1


class BrownianDriver:
    """Two independent streams of i.i.d. N(0, dt*I) planar increments."""

    def __init__(self, seed: int, dt: float):
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.dt = float(dt)
        self._sqrt_dt = math.sqrt(dt)

    def _raw(self, stream: int, start: int, count: int) -> np.ndarray:
        # one 4-word counter block per step (advance() moves whole blocks);
        # only the first two words are used
        key = np.array([self.seed, stream], dtype=np.uint64)
        bg = np.random.Philox(key=key)
        if start:
            bg.advance(start)
        return bg.random_raw(4 * count).reshape(count, 4)

    def normals(self, stream: int, start: int, count: int) -> np.ndarray:
        """Standard-normal 2-vectors for steps [start, start+count)."""
        raw = self._raw(stream, start, count)
        # top 53 bits, offset half a lattice cell: strictly inside (0, 1)
        u1 = ((raw[:, 0] >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53
        u2 = ((raw[:, 1] >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53
        rho = np.sqrt(-2.0 * np.log(u1))
        ang = (2.0 * math.pi) * u2
        return np.stack([rho * np.cos(ang), rho * np.sin(ang)], axis=1)

    def increments(self, stream: int, start: int, count: int) -> np.ndarray:
        """Brownian increments (covariance dt*I) for steps [start, start+count)."""
        return self._sqrt_dt * self.normals(stream, start, count)
