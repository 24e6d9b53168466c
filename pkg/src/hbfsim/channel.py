"""Millimeter-wave channel generation, import/export, and CSI degradation.

Channels follow the narrowband clustered (Saleh-Valenzuela style) model:
a sum of L rank-one products of receive/transmit array response vectors
weighted by complex path gains, scaled by gamma = sqrt(n_r * n_t / L) so
that the average entry power is one.  Arrays are uniform planar grids with
half-wavelength spacing.
"""

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig, is_perfect_square
from .errors import (
    ChannelFileError,
    DimensionError,
    MissingPathsError,
    ParameterError,
)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PathSet:
    """Multipath parameters: complex gains plus departure/arrival angles
    (azimuth in [0, 2*pi), elevation in [0, pi]), all of length L."""

    gains: np.ndarray
    aod_az: np.ndarray
    aod_el: np.ndarray
    aoa_az: np.ndarray
    aoa_el: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gains", np.asarray(self.gains, dtype=np.complex128))
        for name in ("aod_az", "aod_el", "aoa_az", "aoa_el"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        L = self.gains.shape[0]
        for name in ("aod_az", "aod_el", "aoa_az", "aoa_el"):
            if getattr(self, name).shape != (L,):
                raise DimensionError(f"{name} must have length {L}")
        for name in ("aod_az", "aoa_az"):
            az = getattr(self, name)
            if L and (az.min() < 0.0 or az.max() >= TWO_PI):
                raise ParameterError(f"{name} must lie in [0, 2*pi)")
        for name in ("aod_el", "aoa_el"):
            el = getattr(self, name)
            if L and (el.min() < 0.0 or el.max() > math.pi):
                raise ParameterError(f"{name} must lie in [0, pi]")

    @property
    def L(self) -> int:
        return self.gains.shape[0]

    @classmethod
    def empty(cls) -> "PathSet":
        z = np.zeros(0)
        return cls(z.astype(complex), z, z, z, z)


@dataclass(frozen=True)
class ChannelRealization:
    """A channel matrix plus (optionally) the multipath parameters it was
    built from.  Imported channels carry an empty PathSet."""

    h: np.ndarray
    paths: PathSet = field(default_factory=PathSet.empty)
    gamma: float = 0.0

    @property
    def n_r(self) -> int:
        return self.h.shape[0]

    @property
    def n_t(self) -> int:
        return self.h.shape[1]


def upa_response(az: float, el: float, n_antennas: int) -> np.ndarray:
    """Array response vector of a sqrt(N) x sqrt(N) planar array.

    With half-wavelength spacing, grid element (m, n) contributes phase
    pi * (m*sin(az)*sin(el) + n*cos(el)); the vector is laid out with m as
    the outer (slower) index and normalized to unit Euclidean norm.
    """
    if not is_perfect_square(n_antennas):
        raise DimensionError(f"n_antennas={n_antennas} is not a perfect square")
    root = math.isqrt(n_antennas)
    idx = np.arange(n_antennas)
    m, n = idx // root, idx % root
    phase = math.pi * (m * (math.sin(az) * math.sin(el)) + n * math.cos(el))
    return np.exp(1j * phase) / math.sqrt(n_antennas)


def steering_matrix(az: np.ndarray, el: np.ndarray, n_antennas: int) -> np.ndarray:
    """Column-stacked array responses for per-path angle vectors."""
    return np.stack(
        [upa_response(a, e, n_antennas) for a, e in zip(az, el)], axis=1
    ) if len(az) else np.zeros((n_antennas, 0), dtype=complex)


def reconstruct_channel(paths: PathSet, gamma: float, n_r: int, n_t: int) -> np.ndarray:
    """Rebuild the channel matrix gamma * A_r * diag(gains) * A_t^H."""
    if paths.L == 0:
        raise MissingPathsError("cannot reconstruct a channel from an empty path set")
    a_r = steering_matrix(paths.aoa_az, paths.aoa_el, n_r)
    a_t = steering_matrix(paths.aod_az, paths.aod_el, n_t)
    return gamma * (a_r * paths.gains) @ a_t.conj().T


def normalization_factor(n_r: int, n_t: int, n_paths: int) -> float:
    """Channel scaling gamma = sqrt(n_r * n_t / L), which gives the generated
    matrix unit average entry power for any path count."""
    return math.sqrt(n_r * n_t / n_paths)


def generate_channel(cfg: SystemConfig, n_paths: int = None, seed: int = 0) -> ChannelRealization:
    """Draw one channel realization.

    Gains are i.i.d. standard complex Gaussian; departure and arrival
    azimuths are uniform on [0, 2*pi) and elevations uniform on [0, pi].
    Deterministic for a fixed seed.
    """
    L = cfg.n_paths if n_paths is None else n_paths
    if L < 1:
        raise ParameterError(f"number of paths must be >= 1, got {L}")
    if not is_perfect_square(cfg.n_t) or not is_perfect_square(cfg.n_r):
        raise DimensionError("n_t and n_r must be perfect squares")
    rng = np.random.default_rng(seed)
    gains = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) / math.sqrt(2.0)
    paths = PathSet(
        gains=gains,
        aod_az=rng.uniform(0.0, TWO_PI, L),
        aod_el=rng.uniform(0.0, math.pi, L),
        aoa_az=rng.uniform(0.0, TWO_PI, L),
        aoa_el=rng.uniform(0.0, math.pi, L),
    )
    gamma = normalization_factor(cfg.n_r, cfg.n_t, L)
    h = reconstruct_channel(paths, gamma, cfg.n_r, cfg.n_t)
    return ChannelRealization(h=h, paths=paths, gamma=gamma)


def corrupt_csi(h: np.ndarray, xi: float, seed: int = 0) -> np.ndarray:
    """Imperfect channel estimate xi * H + sqrt(1 - xi^2) * E with E drawn
    entrywise from CN(0, 1).  xi=1 returns H unchanged."""
    if not 0.0 <= xi <= 1.0:
        raise ParameterError(f"xi={xi} must be in [0, 1]")
    h = np.asarray(h)
    rng = np.random.default_rng(seed)
    e = (rng.standard_normal(h.shape) + 1j * rng.standard_normal(h.shape)) / math.sqrt(2.0)
    return xi * h + math.sqrt(max(0.0, 1.0 - xi * xi)) * e


def partial_csi_channel(paths: PathSet, gamma: float, n_t: int) -> np.ndarray:
    """L x n_t design matrix available under partial CSI: path gain
    magnitudes and departure angles only, gamma * |diag(gains)| * A_t^H.

    Used in place of the full channel matrix by every precoder solver."""
    if paths.L == 0:
        raise MissingPathsError("partial CSI requires a non-empty path set")
    a_t = steering_matrix(paths.aod_az, paths.aod_el, n_t)
    return gamma * (np.abs(paths.gains)[:, None] * a_t.conj().T)


# --- channel CSV round-trip ------------------------------------------------
# line 1: "# nr=<int> nt=<int>", then nr rows of nt comma-separated complex
# entries formatted like 0.123-0.456j (full double precision).

_HEADER_RE = re.compile(r"^#\s*nr=(\d+)\s+nt=(\d+)\s*$")


def _format_entry(z: complex) -> str:
    re, im = float(z.real), float(z.imag)
    return f"{re!r}{im:+}j"


def export_channel(h: np.ndarray, path) -> None:
    """Write a channel matrix in the header + complex-CSV format."""
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2:
        raise DimensionError("channel matrix must be 2-D")
    with open(path, "w") as fh:
        fh.write(f"# nr={h.shape[0]} nt={h.shape[1]}\n")
        for row in h:
            fh.write(",".join(_format_entry(z) for z in row) + "\n")


def import_channel(path) -> ChannelRealization:
    """Read a channel matrix written by export_channel (or an external tool
    using the same format).  The result carries an empty PathSet, so it can
    only be used in full-CSI mode."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ChannelFileError("empty channel file", line=1)
    m = _HEADER_RE.match(lines[0])
    if m is None:
        raise ChannelFileError("header must be '# nr=<int> nt=<int>'", line=1)
    n_r, n_t = int(m.group(1)), int(m.group(2))

    data_lines = [ln for ln in lines[1:] if ln.strip()]
    h = np.zeros((n_r, n_t), dtype=np.complex128)
    for i, ln in enumerate(data_lines):
        if i >= n_r:
            raise ChannelFileError(
                f"expected {n_r} data rows but found more; extra data row {i + 1}",
                line=i + 2,
            )
        tokens = ln.split(",")
        if len(tokens) != n_t:
            raise ChannelFileError(
                f"data row {i + 1} has {len(tokens)} entries, expected {n_t}",
                line=i + 2,
            )
        for j, tok in enumerate(tokens):
            try:
                h[i, j] = complex(tok.strip())
            except ValueError:
                raise ChannelFileError(
                    f"non-numeric token {tok.strip()!r} in data row {i + 1}",
                    line=i + 2,
                    column=j + 1,
                ) from None
    if len(data_lines) < n_r:
        raise ChannelFileError(
            f"header promises {n_r} data rows, file ends before data row "
            f"{len(data_lines) + 1}",
            line=len(data_lines) + 2,
        )
    return ChannelRealization(h=h, paths=PathSet.empty(), gamma=0.0)
