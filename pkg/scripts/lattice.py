#!/usr/bin/env python3
"""
Lattice primitives: generator matrices, nearest-point quantisers, modulo-lattice
reduction, dither sampling and second-moment estimation.

Points are row vectors, a lattice point is ``z @ G`` for an integer row ``z``.
All operations accept a single n-vector or a batch of shape (m, n).

Supported families:
    integer-cubic   Z^n, per-coordinate rounding (half to even)
    hexagonal       A2, union of two rectangular cosets
    D4              checkerboard lattice, round-and-flip decoder
    E8              D8 union (D8 + 1/2), two-coset decoder
    generic         any full-rank basis with n <= 4, bounded enumeration
"""

import functools
import itertools
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import stats

from errors import (
    BasisError,
    NonPositiveScaleError,
    UnsupportedDimensionError,
    UnsupportedFamilyError,
)

logger = logging.getLogger(__name__)

DEFAULT_MC_SAMPLES = 200_000
MIN_MC_SAMPLES = 10_000
MC_BATCH = 65_536
GENERIC_MAX_DIM = 4
GENERIC_BATCH_ELEMENTS = 1 << 22  # candidate coordinates held at once
TWO_PI_E = 2.0 * math.pi * math.e


class LatticeFamily(str, Enum):
    INTEGER_CUBIC = "integer-cubic"
    HEXAGONAL = "hexagonal"
    D4 = "D4"
    E8 = "E8"
    GENERIC = "generic"


FIXED_DIMENSIONS: Dict[LatticeFamily, int] = {
    LatticeFamily.HEXAGONAL: 2,
    LatticeFamily.D4: 4,
    LatticeFamily.E8: 8,
}

_HEXAGONAL_BASIS = np.array([[1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])

_D4_BASIS = np.array(
    [
        [-1.0, -1.0, 0.0, 0.0],
        [1.0, -1.0, 0.0, 0.0],
        [0.0, 1.0, -1.0, 0.0],
        [0.0, 0.0, 1.0, -1.0],
    ]
)

_E8_BASIS = np.array(
    [
        [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [-1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0],
        [0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
    ]
)


def parse_family(value) -> LatticeFamily:
    """Return the LatticeFamily named by ``value`` (enum or tag string)."""
    try:
        return LatticeFamily(value)
    except ValueError:
        raise UnsupportedFamilyError(
            f"Unknown lattice family '{value}'. "
            f"Expected one of: {', '.join(f.value for f in LatticeFamily)}"
        )


@dataclass(frozen=True)
class SecondMoment:
    """Per-dimension second moment; ``samples == 0`` marks an exact value."""

    value: float
    stderr: float
    samples: int


@dataclass(frozen=True, eq=False)
class Lattice:
    """An immutable lattice ``scale_factor * base`` with its cached statistics.

    Attributes:
        family: Family tag; selects the nearest-point decoder
        generator: n x n row-basis generator matrix (scale included)
        scale_factor: Scale relative to the family's base generator
        sigma2: Second moment per dimension
        sigma2_stderr: Standard error of sigma2 (0 when exact)
        sigma2_samples: Monte-Carlo sample count behind sigma2 (0 when exact)
    """

    family: LatticeFamily
    generator: np.ndarray
    scale_factor: float
    sigma2: float
    sigma2_stderr: float = 0.0
    sigma2_samples: int = 0

    @property
    def n(self) -> int:
        return int(self.generator.shape[0])

    @property
    def volume(self) -> float:
        if self.family is LatticeFamily.INTEGER_CUBIC:
            return self.scale_factor**self.n
        return float(abs(np.linalg.det(self.generator)))

    @property
    def nsm(self) -> float:
        return nsm(self)

    def describe(self) -> Dict[str, object]:
        return {
            "family": self.family.value,
            "dim": self.n,
            "scale": self.scale_factor,
            "volume": self.volume,
            "sigma2": self.sigma2,
            "sigma2_stderr": self.sigma2_stderr,
            "sigma2_samples": self.sigma2_samples,
        }


# ---------------------------------------------------------------------------
# Nearest-point decoders for the base lattices. Input and output are (m, n).
# ---------------------------------------------------------------------------


def _nearest_zn(x: np.ndarray) -> np.ndarray:
    return np.round(x)


def _nearest_dn(x: np.ndarray) -> np.ndarray:
    """Round to Z^n, then fix odd coordinate sums by re-rounding the worst coordinate."""
    f = np.round(x)
    odd = np.mod(f.sum(axis=1), 2.0) != 0.0
    if not np.any(odd):
        return f
    rows = np.nonzero(odd)[0]
    delta = x[rows] - f[rows]
    worst = np.argmax(np.abs(delta), axis=1)
    step = np.where(delta[np.arange(rows.size), worst] > 0.0, 1.0, -1.0)
    f[rows, worst] += step
    return f


def _closer_of(c0: np.ndarray, c1: np.ndarray, x: np.ndarray) -> np.ndarray:
    # Ties keep the lower-index coset.
    d0 = np.sum((x - c0) ** 2, axis=1)
    d1 = np.sum((x - c1) ** 2, axis=1)
    return np.where((d1 < d0)[:, None], c1, c0)


def _nearest_a2(x: np.ndarray) -> np.ndarray:
    root3 = math.sqrt(3.0)
    c0 = np.column_stack((np.round(x[:, 0]), root3 * np.round(x[:, 1] / root3)))
    c1 = np.column_stack(
        (
            np.round(x[:, 0] - 0.5) + 0.5,
            root3 * (np.round(x[:, 1] / root3 - 0.5) + 0.5),
        )
    )
    return _closer_of(c0, c1, x)


def _nearest_e8(x: np.ndarray) -> np.ndarray:
    c0 = _nearest_dn(x)
    c1 = _nearest_dn(x - 0.5) + 0.5
    return _closer_of(c0, c1, x)


_BASE_DECODERS: Dict[LatticeFamily, Callable[[np.ndarray], np.ndarray]] = {
    LatticeFamily.INTEGER_CUBIC: _nearest_zn,
    LatticeFamily.HEXAGONAL: _nearest_a2,
    LatticeFamily.D4: _nearest_dn,
    LatticeFamily.E8: _nearest_e8,
}


@functools.lru_cache(maxsize=32)
def _enumeration_offsets(generator_bytes: bytes, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Integer offsets around the Babai point that must contain the nearest point."""
    generator = np.frombuffer(generator_bytes, dtype=np.float64).reshape(n, n)
    inverse = np.linalg.inv(generator)
    babai_radius = 0.5 * float(np.sum(np.linalg.norm(generator, axis=1)))
    column_norms = np.linalg.norm(inverse, axis=0)
    reach = int(math.ceil(babai_radius * float(column_norms.max()) + 0.5))
    offsets = np.array(list(itertools.product(range(-reach, reach + 1), repeat=n)), dtype=float)
    # lowest-norm offsets first so ties resolve toward the Babai point
    order = np.lexsort((np.arange(len(offsets)), np.sum(offsets**2, axis=1)))
    return offsets[order], inverse


def _nearest_generic(generator: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = generator.shape[0]
    offsets, inverse = _enumeration_offsets(np.ascontiguousarray(generator).tobytes(), n)
    batch = max(1, GENERIC_BATCH_ELEMENTS // (len(offsets) * n))
    out = np.empty_like(x)
    for start in range(0, x.shape[0], batch):
        block = x[start : start + batch]
        centre = np.round(block @ inverse)
        coords = centre[:, None, :] + offsets[None, :, :]
        points = coords @ generator
        dist = np.sum((block[:, None, :] - points) ** 2, axis=2)
        best = np.argmin(dist, axis=1)
        out[start : start + batch] = points[np.arange(block.shape[0]), best]
    return out


def _as_batch(lat: Lattice, x) -> Tuple[np.ndarray, Tuple[int, ...]]:
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1] != lat.n:
        raise UnsupportedDimensionError(
            f"Vector length {arr.shape[-1]} does not match lattice dimension {lat.n}"
        )
    return arr.reshape(-1, lat.n), arr.shape


def nearest_point(lat: Lattice, x) -> np.ndarray:
    """Closest lattice point to ``x`` (or to each row of a batch).

    Args:
        lat: Lattice to quantise to
        x: Finite n-vector or (m, n) batch

    Returns:
        Array of the same shape as ``x`` holding lattice points

    Example:
        >>> nearest_point(make_lattice("integer-cubic", 2), [2.7, -1.2])
        array([ 3., -1.])
    """
    batch, shape = _as_batch(lat, x)
    if lat.family is LatticeFamily.GENERIC:
        points = _nearest_generic(lat.generator, batch)
    else:
        c = lat.scale_factor
        points = c * _BASE_DECODERS[lat.family](batch / c)
    return points.reshape(shape)


def mod_lattice(lat: Lattice, x) -> np.ndarray:
    """Reduce ``x`` into the fundamental Voronoi region: x - Q(x)."""
    arr = np.asarray(x, dtype=float)
    return arr - nearest_point(lat, arr)


def sample_dither(lat: Lattice, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Draw dithers uniform over the Voronoi region of ``lat``.

    A uniform point of the fundamental parallelepiped, reduced modulo the
    lattice, is uniform over the Voronoi cell.

    Returns:
        One n-vector when ``size`` is None, otherwise a (size, n) batch
    """
    count = 1 if size is None else size
    u = rng.random((count, lat.n))
    d = mod_lattice(lat, u @ lat.generator)
    return d[0] if size is None else d


def _estimate_second_moment(lat: Lattice, samples: int, rng: np.random.Generator) -> SecondMoment:
    total = 0.0
    total_sq = 0.0
    remaining = samples
    while remaining > 0:
        count = min(MC_BATCH, remaining)
        d = sample_dither(lat, rng, count)
        energy = np.sum(d * d, axis=1) / lat.n
        total += float(np.sum(energy))
        total_sq += float(np.sum(energy * energy))
        remaining -= count
    mean = total / samples
    variance = max(total_sq / samples - mean * mean, 0.0)
    return SecondMoment(mean, math.sqrt(variance / max(samples - 1, 1)), samples)


def second_moment(
    lat: Lattice,
    samples: int = DEFAULT_MC_SAMPLES,
    rng: Optional[np.random.Generator] = None,
) -> SecondMoment:
    """Second moment per dimension, (1/n) E||D||^2 for a dither D.

    Exact (c^2/12) for the integer-cubic family, otherwise a Monte-Carlo
    estimate with its standard error.

    Raises:
        ValueError: If fewer than MIN_MC_SAMPLES are requested for a Monte-Carlo family
    """
    if lat.family is LatticeFamily.INTEGER_CUBIC:
        return SecondMoment(lat.scale_factor**2 / 12.0, 0.0, 0)
    if samples < MIN_MC_SAMPLES:
        raise ValueError(f"Need at least {MIN_MC_SAMPLES} samples, got {samples}")
    return _estimate_second_moment(lat, samples, rng or np.random.default_rng(0))


@functools.lru_cache(maxsize=16)
def _base_second_moment(family: LatticeFamily, samples: int, seed: int) -> SecondMoment:
    lat = Lattice(family, _base_generator(family, FIXED_DIMENSIONS[family]), 1.0, float("nan"))
    moment = second_moment(lat, samples, np.random.default_rng(seed))
    logger.debug(
        "Estimated base second moment",
        extra={"family": family.value, "sigma2": moment.value, "stderr": moment.stderr},
    )
    return moment


def _base_generator(family: LatticeFamily, dim: int) -> np.ndarray:
    if family is LatticeFamily.INTEGER_CUBIC:
        return np.eye(dim)
    if family is LatticeFamily.HEXAGONAL:
        return _HEXAGONAL_BASIS.copy()
    if family is LatticeFamily.D4:
        return _D4_BASIS.copy()
    if family is LatticeFamily.E8:
        return _E8_BASIS.copy()
    raise UnsupportedFamilyError(f"Family {family.value} has no fixed base generator")


def make_lattice(
    family,
    dim: Optional[int] = None,
    samples: int = DEFAULT_MC_SAMPLES,
    seed: int = 0,
    generator=None,
) -> Lattice:
    """Build a unit-scale lattice of the given family.

    Args:
        family: Family tag or LatticeFamily
        dim: Dimension (required for integer-cubic; checked for fixed families)
        samples: Monte-Carlo samples for the second moment of non-cubic families
        seed: Seed for that estimate
        generator: Row basis, required for the generic family

    Raises:
        UnsupportedDimensionError: Dimension not available for the family
        UnsupportedFamilyError: Unknown family tag
        BasisError: Generic family without a full-rank generator
    """
    family = parse_family(family)

    if family is LatticeFamily.GENERIC:
        if generator is None:
            raise BasisError("generic family requires a generator matrix")
        basis = np.array(generator, dtype=float)
        if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
            raise UnsupportedDimensionError(f"Generator must be square, got shape {basis.shape}")
        if basis.shape[0] > GENERIC_MAX_DIM:
            raise UnsupportedDimensionError(
                f"Generic enumeration supports n <= {GENERIC_MAX_DIM}, got {basis.shape[0]}"
            )
        if abs(np.linalg.det(basis)) <= 0.0:
            raise BasisError("Generator matrix must be full rank")
        basis.setflags(write=False)
        lat = Lattice(family, basis, 1.0, float("nan"))
        moment = second_moment(lat, samples, np.random.default_rng(seed))
        return replace(
            lat, sigma2=moment.value, sigma2_stderr=moment.stderr, sigma2_samples=moment.samples
        )

    if family is LatticeFamily.INTEGER_CUBIC:
        if dim is None or dim < 1:
            raise UnsupportedDimensionError(f"integer-cubic needs a positive dimension, got {dim}")
        basis = np.eye(dim)
        basis.setflags(write=False)
        return Lattice(family, basis, 1.0, 1.0 / 12.0)

    expected = FIXED_DIMENSIONS[family]
    if dim is not None and dim != expected:
        raise UnsupportedDimensionError(
            f"{family.value} exists only in dimension {expected}, got {dim}"
        )
    basis = _base_generator(family, expected)
    basis.setflags(write=False)
    moment = _base_second_moment(family, samples, seed)
    return Lattice(family, basis, 1.0, moment.value, moment.stderr, moment.samples)


def scale(lat: Lattice, c: float) -> Lattice:
    """Return ``c * lat``; sigma2 scales by c^2 and the volume by c^n."""
    if not c > 0:
        raise NonPositiveScaleError(f"Scale factor must be > 0, got {c}")
    if c == 1.0:
        return lat
    generator = c * lat.generator
    generator.setflags(write=False)
    return replace(
        lat,
        generator=generator,
        scale_factor=c * lat.scale_factor,
        sigma2=c * c * lat.sigma2,
        sigma2_stderr=c * c * lat.sigma2_stderr,
    )


def scale_to_second_moment(lat: Lattice, target: float) -> Lattice:
    """Scale ``lat`` so that its second moment equals ``target``."""
    if not target > 0:
        raise NonPositiveScaleError(f"Target second moment must be > 0, got {target}")
    return scale(lat, math.sqrt(target / lat.sigma2))


def nsm(lat: Lattice) -> float:
    """Normalised second moment G = sigma2 / V^(2/n)."""
    return lat.sigma2 / lat.volume ** (2.0 / lat.n)


def shaping_loss_bits(lat: Lattice) -> float:
    """Rate lost to finite-dimensional shaping, 0.5 log2(2 pi e G)."""
    return 0.5 * math.log2(TWO_PI_E * nsm(lat))


def dither_entropy_bits(lat: Lattice) -> float:
    """Differential entropy of a dither, log2 V."""
    return math.log2(lat.volume)


def good_lattice_entropy_bits(lat: Lattice) -> float:
    """Entropy of a Gaussian with the dither's second moment, n/2 log2(2 pi e sigma2)."""
    return 0.5 * lat.n * math.log2(TWO_PI_E * lat.sigma2)


def plugin_entropy_bits(samples, bins: int = 100) -> float:
    """Histogram plug-in estimate of the differential entropy of 1-D samples."""
    counts, edges = np.histogram(np.asarray(samples, dtype=float).ravel(), bins=bins)
    width = float(edges[1] - edges[0])
    return float(stats.entropy(counts, base=2)) + math.log2(width)


def is_sublattice(fine: Lattice, coarse: Lattice, tol: float = 1e-9) -> bool:
    """True when every coarse basis vector is an integer combination of the fine basis."""
    if fine.n != coarse.n:
        return False
    coords = coarse.generator @ np.linalg.inv(fine.generator)
    return bool(np.all(np.abs(coords - np.round(coords)) <= tol))
