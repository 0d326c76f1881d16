"""On-disk formats: GWF1 binary snapshots, LCG1 text states, CSV, JSON lines.

GWF1 layout (little endian): a 32-byte header -- magic b"GWF1", then n,
half_length, and time as float64, then 4 zero pad bytes -- followed by n
interleaved (Re, Im) float64 pairs.

LCG1 layout: a header line "LCG1 K=<K> t=<time>" followed by one line per
Gaussian holding "a b q p Re(c) Im(c)".  This text format doubles as the
propagation checkpoint payload.
"""

import json
import struct

import numpy as np

from .fit import LCGState
from .gaussians import Gaussian1D
from .grid import GridWavefunction, UniformGrid

__all__ = [
    "read_gwf",
    "write_gwf",
    "read_lcg",
    "write_lcg",
    "write_csv",
    "write_wavefunction_csv",
    "append_report_jsonl",
]

GWF_MAGIC = b"GWF1"
_HEADER = struct.Struct("<4sddd4x")  # magic, n, half_length, t; 32 bytes


def write_gwf(path, psi, t):
    """Write a GridWavefunction snapshot taken at time t."""
    values = np.ascontiguousarray(psi.values, dtype=complex)
    interleaved = np.empty(2 * values.size, dtype="<f8")
    interleaved[0::2] = values.real
    interleaved[1::2] = values.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(GWF_MAGIC, float(psi.grid.n), psi.grid.half_length, float(t)))
        fh.write(interleaved.tobytes())


def read_gwf(path):
    """Read a GWF1 snapshot; returns (GridWavefunction, t)."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, n_float, half_length, t = _HEADER.unpack(header)
        if magic != GWF_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        n = int(n_float)
        raw = np.frombuffer(fh.read(16 * n), dtype="<f8")
    if raw.size != 2 * n:
        raise ValueError(f"{path}: expected {2 * n} float64 payload values, got {raw.size}")
    values = raw[0::2] + 1j * raw[1::2]
    return GridWavefunction(UniformGrid(half_length, n), values), float(t)


def write_lcg(path, state):
    """Write an LCGState in the LCG1 text format."""
    lines = [f"LCG1 K={len(state)} t={float(state.time_label)!r}"]
    for g, c in zip(state.gaussians, state.coeffs):
        row = (g.a, g.b, g.q, g.p, c.real, c.imag)
        lines.append(" ".join(repr(float(v)) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_lcg(path):
    """Read an LCG1 text state."""
    with open(path) as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines or not lines[0].startswith("LCG1"):
        raise ValueError(f"{path}: not an LCG1 file")
    fields = dict(item.split("=", 1) for item in lines[0].split()[1:])
    k = int(fields["K"])
    t = float(fields["t"])
    if len(lines) - 1 != k:
        raise ValueError(f"{path}: header promises K={k} Gaussians, found {len(lines) - 1}")
    funcs, coeffs = [], []
    for line in lines[1:]:
        a, b, q, p, cre, cim = (float(tok) for tok in line.split())
        funcs.append(Gaussian1D(a=a, b=b, q=q, p=p))
        coeffs.append(complex(cre, cim))
    return LCGState(tuple(funcs), np.asarray(coeffs), t)


def _format_value(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path, header, columns):
    """Write equal-length columns as CSV with repr-faithful float formatting."""
    columns = [np.asarray(col) for col in columns]
    n_rows = columns[0].shape[0]
    if any(col.shape[0] != n_rows for col in columns):
        raise ValueError("CSV columns must have equal length")
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n_rows):
            fh.write(",".join(_format_value(col[i]) for col in columns) + "\n")


def write_wavefunction_csv(path, psi):
    """CSV dump of a snapshot: x, Re, Im, |psi|^2."""
    values = psi.values
    write_csv(
        path,
        ["x", "re", "im", "density"],
        [psi.grid.x, values.real, values.imag, np.abs(values) ** 2],
    )


def append_report_jsonl(fh, report):
    """Append one per-step propagation record to an open JSON-lines stream."""
    fh.write(
        json.dumps(
            {
                "t": report.t,
                "F": report.objective,
                "gn_iters": report.gn_iterations,
                "backtracks": report.backtracks,
                "K": report.k_after,
                "added": [list(g) for g in report.added],
            },
            sort_keys=True,
        )
        + "\n"
    )
