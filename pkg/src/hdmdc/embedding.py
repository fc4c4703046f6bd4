"""Delay augmentation of states and inputs into stacked data matrices.

The augmented state at step ``j`` stacks the current snapshot with its
``s`` most recent predecessors, newest first; inputs are augmented the
same way with ``z`` delays.  A window of ``m`` snapshots yields
``c = m - 1 - max(s, z)`` usable column pairs: columns that would need
history from before the window are dropped rather than zero-padded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HistoryError, ParameterError, WindowError


@dataclass(frozen=True)
class EmbeddingDims:
    """Channel counts, delay depths, and window length of an embedding."""

    n: int
    q: int
    s: int
    z: int
    m: int

    def __post_init__(self):
        if self.n < 1 or self.q < 1:
            raise ParameterError("need at least one state and one input channel")
        if self.s < 0 or self.z < 0:
            raise ParameterError("delay counts must be nonnegative")
        if self.m < max(self.s, self.z) + 2:
            raise WindowError(
                f"window of {self.m} snapshots cannot host s={self.s}, z={self.z}; "
                f"need at least {max(self.s, self.z) + 2}"
            )

    @property
    def aug_state_dim(self) -> int:
        return self.n * (self.s + 1)

    @property
    def aug_input_dim(self) -> int:
        return self.q * (self.z + 1)

    @property
    def max_delay(self) -> int:
        return max(self.s, self.z)

    @property
    def n_columns(self) -> int:
        return self.m - 1 - self.max_delay


@dataclass(frozen=True)
class DataMatrices:
    """Stacked regression pair: ``Xp ~ G @ Y`` column by column.

    Column ``j`` of ``Y`` is the augmented state/input vector at step
    ``j``; column ``j`` of ``Xp`` is the augmented state one step later.
    """

    Y: np.ndarray
    Xp: np.ndarray
    c: int

    def __post_init__(self):
        Y = np.asarray(self.Y, dtype=np.float64)
        Xp = np.asarray(self.Xp, dtype=np.float64)
        if Y.ndim != 2 or Xp.ndim != 2:
            raise ParameterError("data matrices must be 2-D")
        if Y.shape[1] != self.c or Xp.shape[1] != self.c or self.c < 1:
            raise ParameterError(
                f"inconsistent column counts: Y {Y.shape}, Xp {Xp.shape}, c={self.c}"
            )
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "Xp", Xp)


def augment_state(window: np.ndarray, j: int, s: int) -> np.ndarray:
    """Delay-augmented vector ``[x_j; x_(j-1); ...; x_(j-s)]``.

    ``window`` is ``(T, n)``; ``j`` indexes into it (0-based) and must
    leave ``s`` snapshots of history.
    """
    window = np.atleast_2d(np.asarray(window, dtype=np.float64))
    if s < 0:
        raise ParameterError("s must be nonnegative")
    if j >= window.shape[0] or j - s < 0:
        raise HistoryError(
            f"index {j} with {s} delays needs rows {j - s}..{j}; "
            f"window has {window.shape[0]}"
        )
    return window[j - s:j + 1][::-1].reshape(-1)


def build_matrices(states: np.ndarray, inputs: np.ndarray, s: int, z: int) -> DataMatrices:
    """Assemble the data matrices from aligned state and input snapshots.

    Parameters
    ----------
    states : (T, n) ndarray
    inputs : (T, q) ndarray
    s, z : int
        Number of delayed copies of the state and of the input.

    Returns
    -------
    DataMatrices
        ``Y`` is ``(n(s+1) + q(z+1), c)``, ``Xp`` is ``(n(s+1), c)`` with
        ``c = T - 1 - max(s, z)``.
    """
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    if states.shape[0] != inputs.shape[0]:
        raise ParameterError("states and inputs must share the snapshot axis")
    T, n = states.shape
    q = inputs.shape[1]
    dims = EmbeddingDims(n=n, q=q, s=s, z=z, m=T)
    r = dims.max_delay
    c = dims.n_columns

    Y = np.empty((dims.aug_state_dim + dims.aug_input_dim, c))
    for d in range(s + 1):
        Y[d * n:(d + 1) * n] = states[r - d:r - d + c].T
    off = dims.aug_state_dim
    for d in range(z + 1):
        Y[off + d * q:off + (d + 1) * q] = inputs[r - d:r - d + c].T

    Xp = np.empty((dims.aug_state_dim, c))
    for d in range(s + 1):
        Xp[d * n:(d + 1) * n] = states[r + 1 - d:r + 1 - d + c].T

    return DataMatrices(Y=Y, Xp=Xp, c=c)
