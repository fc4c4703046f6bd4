"""Ridge-regularized fit of the extended linear operator and forecasting.

The operator ``G = [A B]`` minimizes ``||Xp - G Y||_F^2 + lam ||G||_F^2``
over a window of delay-augmented snapshots, which has the closed form
``G = Xp Y^T (Y Y^T + lam I)^(-1)``.  ``G`` is obtained through a
symmetric positive-definite solve of the regularized Gram matrix, never
an explicit inverse.  Forecasts iterate the fitted one-step map on the
augmented state while feeding measured forcing into the input blocks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from . import _kernels
from .embedding import DataMatrices, EmbeddingDims, augment_state, build_matrices
from .errors import (
    FormatError,
    HistoryError,
    InputError,
    ParameterError,
    RankDeficiencyError,
    ShapeError,
    WindowError,
)
from .timeseries import Normalization, TimeSeriesRun, zscore_fit

# Gram matrices with a larger 2-norm condition estimate than this are
# rejected at lam = 0.
DEFAULT_CONDITION_CAP = 1e12

_MAGIC = b"HDMDCM\x01\x00"


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


@dataclass(frozen=True)
class Hyperparameters:
    """Continuous training-window and delay-span lengths plus the ridge factor.

    ``l_tr`` is the training window length, ``l_dx``/``l_du`` the maximum
    state/input delay spans (all in seconds), and ``lam`` the
    regularization factor.  The discrete counterparts follow from the
    sampling step via :meth:`discrete`.
    """

    l_tr: float
    l_dx: float
    l_du: float
    lam: float

    def __post_init__(self):
        for name in ("l_tr", "l_dx", "l_du", "lam"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ParameterError(f"{name} must be finite and nonnegative")
        if not (self.l_tr > self.l_dx and self.l_tr > self.l_du):
            raise ParameterError(
                f"l_tr={self.l_tr:.6g} must exceed both delay spans "
                f"(l_dx={self.l_dx:.6g}, l_du={self.l_du:.6g})"
            )

    def discrete(self, dt: float) -> tuple[int, int, int]:
        """Snapshot count and delay counts ``(m, s, z)`` at step ``dt``."""
        if not dt > 0:
            raise ParameterError("dt must be positive")
        return (
            _round_half_up(self.l_tr / dt),
            _round_half_up(self.l_dx / dt),
            _round_half_up(self.l_du / dt),
        )

    def axis_tuple(self) -> tuple[float, float, float, float]:
        return (self.l_tr, self.l_dx, self.l_du, self.lam)


def fit(dm: DataMatrices, lam: float, cond_cap: float = DEFAULT_CONDITION_CAP) -> np.ndarray:
    """Solve the regularized regression for ``G``.

    Parameters
    ----------
    dm : DataMatrices
    lam : float
        Ridge factor; ``lam = 0`` requires the Gram matrix to be well
        conditioned (2-norm condition estimate below ``cond_cap``).

    Returns
    -------
    (rows(Xp), rows(Y)) ndarray
    """
    if lam < 0 or not np.isfinite(lam):
        raise ParameterError("lam must be finite and nonnegative")
    Y, Xp = dm.Y, dm.Xp
    gram = Y @ Y.T
    cross = Xp @ Y.T
    if lam == 0.0:
        w = np.linalg.eigvalsh(gram)
        if w[0] <= 0 or w[-1] / w[0] > cond_cap:
            raise RankDeficiencyError(
                f"Gram matrix condition ~{w[-1] / max(w[0], 1e-300):.3g} exceeds "
                f"{cond_cap:.3g}; set lam > 0 to regularize"
            )
    else:
        gram[np.diag_indices_from(gram)] += lam
    try:
        G = scipy.linalg.solve(gram, cross.T, assume_a="pos").T
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(
            f"regularized Gram solve failed ({exc}); increase lam"
        )
    return G


def normal_equation_residual(G: np.ndarray, dm: DataMatrices, lam: float) -> float:
    """Relative residual ``||G (YY^T + lam I) - Xp Y^T||_F / max(1, ||Xp Y^T||_F)``."""
    gram = dm.Y @ dm.Y.T
    gram[np.diag_indices_from(gram)] += lam
    cross = dm.Xp @ dm.Y.T
    num = np.linalg.norm(G @ gram - cross, "fro")
    return float(num / max(1.0, np.linalg.norm(cross, "fro")))


@dataclass(frozen=True)
class HdmdcModel:
    """Fitted extended operator with its embedding and normalization."""

    A_hat: np.ndarray
    B_hat: np.ndarray
    dims: EmbeddingDims
    normalization: Normalization
    hyper: Hyperparameters
    training_run_id: str
    dt: float
    state_channels: tuple[str, ...]
    input_channels: tuple[str, ...]

    def __post_init__(self):
        A = np.asarray(self.A_hat, dtype=np.float64)
        B = np.asarray(self.B_hat, dtype=np.float64)
        p, r = self.dims.aug_state_dim, self.dims.aug_input_dim
        if A.shape != (p, p) or B.shape != (p, r):
            raise ShapeError(
                f"operator blocks {A.shape}/{B.shape} do not match "
                f"augmented dims ({p}, {r})"
            )
        if len(self.state_channels) != self.dims.n or len(self.input_channels) != self.dims.q:
            raise ShapeError("channel lists do not match embedding dims")
        if not self.dt > 0:
            raise ParameterError("dt must be positive")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A_hat", A)
        object.__setattr__(self, "B_hat", B)
        object.__setattr__(self, "state_channels", tuple(self.state_channels))
        object.__setattr__(self, "input_channels", tuple(self.input_channels))

    @property
    def G(self) -> np.ndarray:
        return np.hstack([self.A_hat, self.B_hat])

    @property
    def warmup_samples(self) -> int:
        """Snapshots needed before the first forecast step."""
        return self.dims.max_delay + 1


@dataclass(frozen=True)
class Forecast:
    """Predicted state trajectory in physical units."""

    t: np.ndarray
    values: np.ndarray
    member_id: str = ""

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or t.shape != (values.shape[0],):
            raise ShapeError("forecast time vector must match value rows")
        t.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", values)

    @property
    def horizon(self) -> int:
        return self.values.shape[0]


def one_step(model: HdmdcModel, x_hat: np.ndarray, u_hat: np.ndarray) -> np.ndarray:
    """Advance one augmented state by the fitted map."""
    x_hat = np.asarray(x_hat, dtype=np.float64)
    u_hat = np.asarray(u_hat, dtype=np.float64)
    if x_hat.shape != (model.dims.aug_state_dim,):
        raise ShapeError(
            f"augmented state has shape {x_hat.shape}, "
            f"expected ({model.dims.aug_state_dim},)"
        )
    if u_hat.shape != (model.dims.aug_input_dim,):
        raise ShapeError(
            f"augmented input has shape {u_hat.shape}, "
            f"expected ({model.dims.aug_input_dim},)"
        )
    return model.A_hat @ x_hat + model.B_hat @ u_hat


def fit_model(
    sequence: TimeSeriesRun,
    hyper: Hyperparameters,
    *,
    cond_cap: float = DEFAULT_CONDITION_CAP,
    normalize: bool = True,
    window_start: int = 0,
) -> HdmdcModel:
    """Fit an operator on the leading window of a training sequence.

    The window of ``m = round(l_tr / dt)`` snapshots starts at
    ``window_start``; the Z-score statistics are evaluated on exactly that
    window and stored with the model.  ``normalize=False`` keeps the data
    in physical units (identity statistics), which preserves exactness on
    noise-free linear benchmarks.
    """
    if sequence.input_channel is None:
        raise ParameterError(f"run {sequence.id!r} has no designated input channel")
    m, s, z = hyper.discrete(sequence.dt)
    if m < max(s, z) + 2:
        raise WindowError(
            f"l_tr={hyper.l_tr:.6g} yields m={m}, too short for delays s={s}, z={z}"
        )
    if window_start < 0 or window_start + m > sequence.n_samples:
        raise WindowError(
            f"training window of {m} samples at offset {window_start} does not "
            f"fit sequence {sequence.id!r} of {sequence.n_samples}"
        )
    window = sequence.window(window_start, m, suffix="") if (window_start, m) != (0, sequence.n_samples) else sequence
    if normalize:
        norm = zscore_fit(window)
    else:
        norm = Normalization.identity(window.channels)
    state_names = window.state_channels
    input_names = (window.input_channel,)
    states = norm.transform(window.state_values(), state_names)
    inputs = norm.transform(window.input_values(), input_names)
    dm = build_matrices(states, inputs, s, z)
    G = fit(dm, hyper.lam, cond_cap=cond_cap)
    dims = EmbeddingDims(n=states.shape[1], q=inputs.shape[1], s=s, z=z, m=m)
    return HdmdcModel(
        A_hat=G[:, :dims.aug_state_dim],
        B_hat=G[:, dims.aug_state_dim:],
        dims=dims,
        normalization=norm,
        hyper=hyper,
        training_run_id=sequence.id,
        dt=sequence.dt,
        state_channels=state_names,
        input_channels=input_names,
    )


def _prepare_rollout(model, warmup_states, warmup_inputs, future_inputs, horizon):
    """Normalize and augment inputs for the rollout kernel."""
    d = model.dims
    warmup_states = np.atleast_2d(np.asarray(warmup_states, dtype=np.float64))
    warmup_inputs = np.atleast_2d(np.asarray(warmup_inputs, dtype=np.float64))
    if warmup_states.shape[1] != d.n or warmup_inputs.shape[1] != d.q:
        raise ShapeError("warmup channel counts do not match the model")
    W = warmup_states.shape[0]
    if warmup_inputs.shape[0] != W:
        raise ShapeError("warmup states and inputs must have equal length")
    if W < d.max_delay + 1:
        raise HistoryError(
            f"warmup of {W} samples is shorter than max(s, z) + 1 = {d.max_delay + 1}"
        )
    future_inputs = np.atleast_2d(np.asarray(future_inputs, dtype=np.float64))
    if future_inputs.size == 0:
        future_inputs = future_inputs.reshape(0, d.q)
    if future_inputs.shape[1] != d.q:
        raise ShapeError("future forcing channel count does not match the model")
    if future_inputs.shape[0] < max(horizon - 1, 0):
        raise InputError(
            f"horizon {horizon} needs at least {horizon - 1} future forcing "
            f"samples, got {future_inputs.shape[0]}"
        )
    norm = model.normalization
    xs = norm.transform(warmup_states, model.state_channels)
    us = norm.transform(warmup_inputs, model.input_channels)
    xhat0 = augment_state(xs, W - 1, d.s)
    uhat0 = augment_state(us, W - 1, d.z)
    u_future = norm.transform(future_inputs[:max(horizon - 1, 0)], model.input_channels)
    return xhat0, uhat0, u_future


def predict(
    model: HdmdcModel,
    warmup_states: np.ndarray,
    warmup_inputs: np.ndarray,
    future_inputs: np.ndarray,
    horizon: int,
    *,
    t0: float = 0.0,
    member_id: str | None = None,
) -> Forecast:
    """Roll the fitted map forward and return the physical-unit trajectory.

    The warmup arrays supply at least ``max(s, z) + 1`` consecutive
    snapshots of measured state and forcing (physical units); the last
    samples seed the augmented vectors.  ``future_inputs`` holds the
    measured forcing from the first forecast instant on — the delayed
    input entries advance through it, so forcing is never predicted.  The
    sample at the final forecast instant is never consumed, hence
    ``horizon - 1`` rows suffice.

    Returns the first ``n`` state components per step, de-normalized, at
    times ``t0 + dt, ..., t0 + horizon * dt``.
    """
    if horizon < 0:
        raise ParameterError("horizon must be nonnegative")
    d = model.dims
    if horizon == 0:
        return Forecast(
            t=np.empty(0),
            values=np.empty((0, d.n)),
            member_id=member_id if member_id is not None else model.training_run_id,
        )
    xhat0, uhat0, u_future = _prepare_rollout(
        model, warmup_states, warmup_inputs, future_inputs, horizon
    )
    raw = _kernels.rollout_batch(
        model.A_hat,
        model.B_hat,
        xhat0[:, None],
        uhat0[:, None],
        u_future[:, :, None],
        d.q,
        horizon,
        d.n,
    )[:, :, 0]
    values = model.normalization.inverse(raw, model.state_channels)
    t = t0 + model.dt * np.arange(1, horizon + 1)
    return Forecast(
        t=t,
        values=values,
        member_id=member_id if member_id is not None else model.training_run_id,
    )


def forecast_sequence(
    model: HdmdcModel,
    sequence: TimeSeriesRun,
    *,
    warmup: int | None = None,
    horizon: int | None = None,
) -> tuple[Forecast, np.ndarray]:
    """Forecast a test sequence from its leading samples.

    The first ``warmup`` samples (default ``max(s, z) + 1``) initialize the
    augmented vectors; the measured forcing drives the remaining steps.
    Returns the forecast and the measured state values over the same
    horizon for error evaluation.
    """
    if sequence.input_channel is None:
        raise ParameterError(f"run {sequence.id!r} has no designated input channel")
    if tuple(sequence.state_channels) != model.state_channels:
        raise ShapeError(
            f"sequence channels {sequence.state_channels} do not match "
            f"model channels {model.state_channels}"
        )
    w = model.warmup_samples if warmup is None else int(warmup)
    if w < model.warmup_samples:
        raise HistoryError(
            f"warmup of {w} samples is shorter than required {model.warmup_samples}"
        )
    max_h = sequence.n_samples - w
    h = max_h if horizon is None else int(horizon)
    if h < 0 or h > max_h:
        raise ParameterError(
            f"horizon {h} does not fit sequence {sequence.id!r} after warmup {w}"
        )
    states = sequence.state_values()
    inputs = sequence.input_values()
    fc = predict(
        model,
        states[:w],
        inputs[:w],
        inputs[w:w + h],
        h,
        t0=(w - 1) * sequence.dt,
    )
    return fc, states[w:w + h]


def forecast_many(
    model: HdmdcModel,
    sequences,
    *,
    warmup: int | None = None,
) -> list[tuple[Forecast, np.ndarray]]:
    """Forecast several equally long sequences in one batched rollout.

    Falls back to per-sequence calls when lengths differ.  Results are
    identical to mapping :func:`forecast_sequence` over the list.
    """
    sequences = list(sequences)
    if not sequences:
        return []
    lengths = {seq.n_samples for seq in sequences}
    if len(lengths) > 1:
        return [forecast_sequence(model, s, warmup=warmup) for s in sequences]
    w = model.warmup_samples if warmup is None else int(warmup)
    horizon = sequences[0].n_samples - w
    if horizon <= 0:
        return [forecast_sequence(model, s, warmup=warmup) for s in sequences]
    d = model.dims
    cols_x, cols_u, cols_f, refs = [], [], [], []
    for seq in sequences:
        if tuple(seq.state_channels) != model.state_channels:
            raise ShapeError(f"sequence {seq.id!r} channels do not match the model")
        states = seq.state_values()
        inputs = seq.input_values()
        xhat0, uhat0, u_future = _prepare_rollout(
            model, states[:w], inputs[:w], inputs[w:w + horizon], horizon
        )
        cols_x.append(xhat0)
        cols_u.append(uhat0)
        cols_f.append(u_future)
        refs.append(states[w:w + horizon])
    raw = _kernels.rollout_batch(
        model.A_hat,
        model.B_hat,
        np.stack(cols_x, axis=1),
        np.stack(cols_u, axis=1),
        np.stack(cols_f, axis=2),
        d.q,
        horizon,
        d.n,
    )
    t = (w - 1) * model.dt + model.dt * np.arange(1, horizon + 1)
    out = []
    for i, seq in enumerate(sequences):
        values = model.normalization.inverse(raw[:, :, i], model.state_channels)
        out.append((Forecast(t=t, values=values, member_id=model.training_run_id), refs[i]))
    return out


def save_model(model: HdmdcModel, path) -> None:
    """Write a model to a self-describing binary container.

    Layout: an 8-byte magic/version header, a little-endian uint64 JSON
    header length, the JSON header, then the row-major float64 bytes of
    ``A_hat`` followed by ``B_hat``.  Matrix entries round-trip bit-exact.
    """
    header = {
        "dims": {"n": model.dims.n, "q": model.dims.q, "s": model.dims.s,
                 "z": model.dims.z, "m": model.dims.m},
        "hyper": {"l_tr": model.hyper.l_tr, "l_dx": model.hyper.l_dx,
                  "l_du": model.hyper.l_du, "lam": model.hyper.lam},
        "normalization": {
            "channels": list(model.normalization.channels),
            "mean": [float(v) for v in model.normalization.mean],
            "std": [float(v) for v in model.normalization.std],
        },
        "training_run_id": model.training_run_id,
        "dt": model.dt,
        "state_channels": list(model.state_channels),
        "input_channels": list(model.input_channels),
        "a_shape": list(model.A_hat.shape),
        "b_shape": list(model.B_hat.shape),
        "dtype": "<f8",
    }
    payload = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(str(path), "wb") as fh:
        fh.write(_MAGIC)
        fh.write(len(payload).to_bytes(8, "little"))
        fh.write(payload)
        fh.write(np.ascontiguousarray(model.A_hat, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.B_hat, dtype="<f8").tobytes())


def load_model(path) -> HdmdcModel:
    """Read a model written by :func:`save_model`."""
    with open(str(path), "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise FormatError(f"{path}: not a model container (bad magic)")
        (length,) = (int.from_bytes(fh.read(8), "little"),)
        header = json.loads(fh.read(length).decode("utf-8"))
        a_shape = tuple(header["a_shape"])
        b_shape = tuple(header["b_shape"])
        a_bytes = fh.read(8 * a_shape[0] * a_shape[1])
        b_bytes = fh.read(8 * b_shape[0] * b_shape[1])
    A = np.frombuffer(a_bytes, dtype="<f8").reshape(a_shape).copy()
    B = np.frombuffer(b_bytes, dtype="<f8").reshape(b_shape).copy()
    if A.size != a_shape[0] * a_shape[1] or B.size != b_shape[0] * b_shape[1]:
        raise FormatError(f"{path}: truncated matrix payload")
    dims = EmbeddingDims(**header["dims"])
    norm = Normalization(
        tuple(header["normalization"]["channels"]),
        np.array(header["normalization"]["mean"]),
        np.array(header["normalization"]["std"]),
    )
    return HdmdcModel(
        A_hat=A,
        B_hat=B,
        dims=dims,
        normalization=norm,
        hyper=Hyperparameters(**header["hyper"]),
        training_run_id=header["training_run_id"],
        dt=header["dt"],
        state_channels=tuple(header["state_channels"]),
        input_channels=tuple(header["input_channels"]),
    )
