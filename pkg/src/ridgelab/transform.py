"""Analytic wavelet transform on a time x log-scale grid.

Each scale row is computed in the frequency domain: the DFT of the input is
multiplied by ``conj(psi_hat(s * omega_j))`` on the positive frequencies only
and transformed back. Scale-derivative channels use the analytic multipliers
``omega * conj(Dpsi_hat(s omega))`` and ``omega^2 * conj(D2psi_hat(s omega))``.
"""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .wavelets import WaveletSpec, eval_d2psi_hat, eval_dpsi_hat, eval_psi_hat

__all__ = [
    "TimeScaleGrid",
    "AwtField",
    "ScalogramField",
    "MissingChannelError",
    "awt_forward",
    "scalogram",
    "column",
    "valid_margin",
    "valid_slice",
    "write_container",
    "read_container",
    "write_field_csv",
]

MAGIC = b"RGLB1"


class MissingChannelError(KeyError):
    pass


@dataclass(frozen=True)
class TimeScaleGrid:
    t0: float
    fs: float
    n_time: int
    s_min: float
    ratio: float
    n_scale: int

    def __post_init__(self):
        if self.n_time < 2 or self.n_scale < 2:
            raise ValueError("grid needs at least two times and two scales")
        if self.s_min <= 0 or self.ratio <= 1:
            raise ValueError("scales must be positive and strictly increasing")

    @classmethod
    def from_span(cls, t0: float, fs: float, n_time: int, s_min: float, s_max: float,
                  voices: int = 64) -> "TimeScaleGrid":
        """Log grid from s_min to at least s_max with ``voices`` scales per octave."""
        ratio = 2.0 ** (1.0 / voices)
        n_scale = int(np.ceil(np.log(s_max / s_min) / np.log(ratio) - 1e-9)) + 1
        return cls(t0, fs, n_time, s_min, ratio, n_scale)

    @property
    def scales(self) -> np.ndarray:
        return self.s_min * self.ratio ** np.arange(self.n_scale)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_time) / self.fs

    @property
    def log_step(self) -> float:
        return float(np.log(self.ratio))

    def scale_index(self, s: float) -> int:
        """Nearest grid index to scale s (clipped)."""
        i = int(round(np.log(s / self.s_min) / self.log_step))
        return min(max(i, 0), self.n_scale - 1)


@dataclass
class AwtField:
    grid: TimeScaleGrid
    W: np.ndarray
    dW_ds: np.ndarray | None = None
    d2W_ds2: np.ndarray | None = None


@dataclass
class ScalogramField:
    grid: TimeScaleGrid
    S: np.ndarray
    dS_ds: np.ndarray | None = None
    d2S_ds2: np.ndarray | None = None


def _omega(n: int, fs: float) -> tuple[np.ndarray, np.ndarray]:
    """Angular DFT frequencies and the mask of strictly positive bins below Nyquist."""
    j = np.arange(n)
    pos = (j > 0) & (2 * j < n)
    return 2 * np.pi * j * fs / n, pos


def awt_forward(x, fs: float, w: WaveletSpec, grid: TimeScaleGrid,
                channels=("W",)) -> AwtField:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) != grid.n_time:
        raise ValueError(f"signal length {x.shape} does not match grid n_time={grid.n_time}")
    unknown = set(channels) - {"W", "dW", "d2W"}
    if unknown:
        raise ValueError(f"unknown channels {sorted(unknown)}")
    xh = np.fft.fft(x)
    om, pos = _omega(len(x), fs)
    op = om[pos]
    s = grid.scales[:, None]
    spec = xh[pos][None, :]

    def rows(mult):
        full = np.zeros((grid.n_scale, len(x)), dtype=complex)
        full[:, pos] = spec * mult
        return np.fft.ifft(full, axis=1)

    out = AwtField(grid=grid, W=rows(np.conj(eval_psi_hat(w, s * op))))
    if "dW" in channels:
        out.dW_ds = rows(op * np.conj(eval_dpsi_hat(w, s * op)))
    if "d2W" in channels:
        out.d2W_ds2 = rows(op**2 * np.conj(eval_d2psi_hat(w, s * op)))
    return out


def scalogram(field: AwtField, channels=("S",)) -> ScalogramField:
    """S = |W|^2 with dS/ds = 2 Re(conj(W) dW) and d2S/ds2 = 2|dW|^2 + 2 Re(conj(W) d2W)."""
    W = field.W
    out = ScalogramField(grid=field.grid, S=np.abs(W) ** 2)
    if "dS" in channels or "d2S" in channels:
        if field.dW_ds is None:
            raise MissingChannelError("dW channel not computed")
    if "dS" in channels:
        out.dS_ds = 2 * np.real(np.conj(W) * field.dW_ds)
    if "d2S" in channels:
        if field.d2W_ds2 is None:
            raise MissingChannelError("d2W channel not computed")
        out.d2S_ds2 = 2 * np.abs(field.dW_ds) ** 2 + 2 * np.real(np.conj(W) * field.d2W_ds2)
    return out


def column(fieldlike, t_index: int, channel: str | None = None) -> np.ndarray:
    """Scale profile at one time index (a view into the field)."""
    if isinstance(fieldlike, AwtField):
        arr = {"W": fieldlike.W, "dW": fieldlike.dW_ds, "d2W": fieldlike.d2W_ds2}[channel or "W"]
    elif isinstance(fieldlike, ScalogramField):
        arr = {"S": fieldlike.S, "dS": fieldlike.dS_ds, "d2S": fieldlike.d2S_ds2}[channel or "S"]
    else:
        arr = np.asarray(fieldlike)
    if arr is None:
        raise MissingChannelError(f"channel {channel!r} not present")
    n = arr.shape[1]
    if not 0 <= t_index < n:
        raise IndexError(f"time index {t_index} outside [0, {n})")
    return arr[:, t_index]


def valid_margin(w: WaveletSpec, s: float, fs: float) -> int:
    """Samples at each end contaminated by periodic wraparound at scale s."""
    return int(np.ceil(s * w.time_support * fs))


def valid_slice(grid: TimeScaleGrid, w: WaveletSpec, s_max: float | None = None) -> slice:
    """Time indices free of wraparound for every scale up to s_max (default: grid max)."""
    s = grid.scales[-1] if s_max is None else s_max
    m = valid_margin(w, s, grid.fs)
    if 2 * m >= grid.n_time:
        raise ValueError("valid region is empty; lengthen the signal or shrink the scale span")
    return slice(m, grid.n_time - m)


# ----------------------------------------------------------------------------
# serialization
# ----------------------------------------------------------------------------

def write_container(path, grid: TimeScaleGrid, fields: dict[str, np.ndarray]) -> None:
    """Binary container: ``RGLB1``, grid header, then named row-major fields.

    Layout (little-endian): magic; u32 n_time, u32 n_scale, f64 t0, f64 fs,
    f64 s_min, f64 ratio; u32 n_fields; per field: u8 name length, name,
    u8 is_complex, u32 rows, u32 cols, then doubles (complex interleaved).
    """
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II4d", grid.n_time, grid.n_scale, grid.t0, grid.fs, grid.s_min, grid.ratio))
        fh.write(struct.pack("<I", len(fields)))
        for name, arr in fields.items():
            arr = np.asarray(arr)
            cplx = np.iscomplexobj(arr)
            nb = name.encode("ascii")
            fh.write(struct.pack("<B", len(nb)) + nb)
            fh.write(struct.pack("<BII", int(cplx), *arr.shape))
            dt = "<c16" if cplx else "<f8"
            fh.write(np.ascontiguousarray(arr, dtype=dt).tobytes())


def read_container(path) -> tuple[TimeScaleGrid, dict[str, np.ndarray]]:
    data = Path(path).read_bytes()
    if data[:5] != MAGIC:
        raise ValueError("not an RGLB1 container")
    off = 5
    n_time, n_scale, t0, fs, s_min, ratio = struct.unpack_from("<II4d", data, off)
    off += struct.calcsize("<II4d")
    grid = TimeScaleGrid(t0, fs, n_time, s_min, ratio, n_scale)
    (nf,) = struct.unpack_from("<I", data, off)
    off += 4
    fields = {}
    for _ in range(nf):
        ln = data[off]
        off += 1
        name = data[off:off + ln].decode("ascii")
        off += ln
        cplx, rows, cols = struct.unpack_from("<BII", data, off)
        off += struct.calcsize("<BII")
        dt = np.dtype("<c16" if cplx else "<f8")
        nbytes = rows * cols * dt.itemsize
        fields[name] = np.frombuffer(data, dtype=dt, count=rows * cols, offset=off).reshape(rows, cols).copy()
        off += nbytes
    return grid, fields


def write_field_csv(path, grid: TimeScaleGrid, arr: np.ndarray) -> None:
    """Long-format CSV: ``t,s,re,im`` for complex fields, ``t,s,S`` for real ones."""
    cplx = np.iscomplexobj(arr)
    t, s = grid.times, grid.scales
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "s", "re", "im"] if cplx else ["t", "s", "S"])
        for i in range(grid.n_scale):
            for k in range(grid.n_time):
                v = arr[i, k]
                wr.writerow([repr(float(t[k])), repr(float(s[i]))] +
                            ([repr(float(v.real)), repr(float(v.imag))] if cplx else [repr(float(v))]))
