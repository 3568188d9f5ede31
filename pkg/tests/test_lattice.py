#!/usr/bin/env python3
"""
Tests for scripts/lattice.py

Nearest-point decoders, modulo reduction, dithers and second moments.
"""

import itertools
import math
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))

from errors import (
    BasisError,
    NonPositiveScaleError,
    UnsupportedDimensionError,
    UnsupportedFamilyError,
)
from lattice import (
    LatticeFamily,
    dither_entropy_bits,
    good_lattice_entropy_bits,
    is_sublattice,
    make_lattice,
    mod_lattice,
    nearest_point,
    nsm,
    plugin_entropy_bits,
    sample_dither,
    scale,
    second_moment,
    shaping_loss_bits,
)

FAMILIES = [
    ("integer-cubic", 1),
    ("integer-cubic", 3),
    ("hexagonal", None),
    ("D4", None),
    ("E8", None),
]


def _lattice(family, dim):
    return make_lattice(family, dim, samples=20_000, seed=0)


def _brute_force_nearest(generator, x):
    """Nearest lattice point by exhaustive search over a provably large coefficient box.

    With c0 = round(x G^-1) and y0 = c0 G, the nearest point p satisfies
    |p - y0| <= 2 |x - y0|, so its coefficients lie within
    2 |x - y0| |G^-1|_2 of c0 in every coordinate.
    """
    n = generator.shape[0]
    inverse = np.linalg.inv(generator)
    center = np.round(x @ inverse)
    spread = np.max(np.linalg.norm(x - center @ generator, axis=1))
    reach = 2.0 * spread * np.linalg.norm(inverse, 2)
    radius = int(math.ceil(reach))
    offsets = np.array(list(itertools.product(range(-radius, radius + 1), repeat=n)), dtype=float)
    candidates = (center[:, None, :] + offsets[None, :, :]) @ generator
    distances = np.sum((x[:, None, :] - candidates) ** 2, axis=2)
    return candidates[np.arange(len(x)), np.argmin(distances, axis=1)]


class TestNearestPoint:
    """Test nearest_point on worked examples."""

    def test_integer_cubic_rounding(self):
        """Per-coordinate rounding in Z^2."""
        lat = make_lattice("integer-cubic", 2)

        assert np.array_equal(nearest_point(lat, [2.7, -1.2]), [3.0, -1.0])

    def test_tie_breaks_to_even(self):
        """0.5 rounds to 0 and 1.5 to 2."""
        lat = make_lattice("integer-cubic", 1)

        assert nearest_point(lat, [0.5])[0] == 0.0
        assert nearest_point(lat, [1.5])[0] == 2.0

    def test_batch_shape_preserved(self, rng):
        """A (m, n) batch returns a (m, n) batch."""
        lat = _lattice("E8", None)
        x = rng.normal(size=(7, 8))

        assert nearest_point(lat, x).shape == (7, 8)

    def test_dimension_mismatch(self):
        """Vectors of the wrong length are rejected."""
        lat = make_lattice("integer-cubic", 2)

        with pytest.raises(UnsupportedDimensionError):
            nearest_point(lat, [1.0, 2.0, 3.0])

    def test_hexagonal_matches_enumeration(self, rng):
        """Specialised decoders agree with exhaustive search on the same basis."""
        lat = _lattice("hexagonal", None)
        generic = make_lattice("generic", generator=lat.generator, samples=10_000)
        x = rng.normal(scale=3.0, size=(2000, lat.n))

        fast = nearest_point(lat, x)
        slow = nearest_point(generic, x)
        fast_d = np.sum((x - fast) ** 2, axis=1)
        slow_d = np.sum((x - slow) ** 2, axis=1)

        assert np.allclose(fast_d, slow_d, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("n", [2, 3])
    def test_generic_matches_brute_force(self, n, rng):
        """Generic decoding on a skewed random basis agrees with exhaustive search."""
        generator = np.eye(n) + 0.4 * rng.uniform(-1.0, 1.0, size=(n, n))
        lat = make_lattice("generic", generator=generator, samples=10_000)
        x = rng.normal(scale=2.0, size=(200, n))

        decoded = nearest_point(lat, x)
        expected = _brute_force_nearest(lat.generator, x)

        assert np.allclose(
            np.sum((x - decoded) ** 2, axis=1),
            np.sum((x - expected) ** 2, axis=1),
            rtol=1e-12,
            atol=1e-12,
        )

    def test_result_is_lattice_point(self, rng):
        """E8 outputs have integer coordinates in the basis."""
        lat = _lattice("E8", None)
        points = nearest_point(lat, rng.normal(size=(500, 8)))
        coords = points @ np.linalg.inv(lat.generator)

        assert np.allclose(coords, np.round(coords), atol=1e-9)


class TestModLattice:
    """Test mod_lattice identities."""

    def test_integer_cubic_example(self):
        """2.7 mod Z = -0.3."""
        lat = make_lattice("integer-cubic", 1)

        assert mod_lattice(lat, [2.7])[0] == pytest.approx(-0.3)

    @pytest.mark.parametrize("family,dim", FAMILIES)
    def test_idempotence(self, family, dim, rng):
        """Reducing twice equals reducing once."""
        lat = scale(_lattice(family, dim), 1.7)
        x = rng.uniform(-10.0, 10.0, size=(10_000, lat.n))
        once = mod_lattice(lat, x)

        assert np.allclose(mod_lattice(lat, once), once, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("family,dim", FAMILIES)
    def test_distributive_law(self, family, dim, rng):
        """([x mod L] + y) mod L = (x + y) mod L."""
        lat = _lattice(family, dim)
        x = rng.uniform(-10.0, 10.0, size=(10_000, lat.n))
        y = rng.uniform(-10.0, 10.0, size=(10_000, lat.n))

        lhs = mod_lattice(lat, mod_lattice(lat, x) + y)
        rhs = mod_lattice(lat, x + y)

        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-11)

    @pytest.mark.parametrize("family,dim", FAMILIES)
    def test_output_quantises_to_origin(self, family, dim, rng):
        """Reduced vectors have the origin as nearest point."""
        lat = _lattice(family, dim)
        reduced = mod_lattice(lat, rng.normal(scale=5.0, size=(1000, lat.n)))

        assert np.allclose(nearest_point(lat, reduced), 0.0)


class TestSampleDither:
    """Test dither sampling."""

    @pytest.mark.parametrize("family,dim", FAMILIES)
    def test_membership(self, family, dim, rng):
        """Every dither already lies in the Voronoi region."""
        lat = _lattice(family, dim)
        d = sample_dither(lat, rng, 5000)

        assert np.allclose(mod_lattice(lat, d), d)

    def test_single_vector(self, rng):
        """size=None returns one n-vector."""
        lat = _lattice("hexagonal", None)

        assert sample_dither(lat, rng).shape == (2,)

    def test_unit_interval_moments(self, rng):
        """10^5 dithers on Z: mean 0 and variance 1/12 within 4 standard errors."""
        lat = make_lattice("integer-cubic", 1)
        d = sample_dither(lat, rng, 100_000)[:, 0]
        variance_se = math.sqrt((1.0 / 80.0 - 1.0 / 144.0) / d.size)

        assert abs(d.mean()) <= 4.0 / math.sqrt(12.0 * d.size)
        assert abs(np.mean(d**2) - 1.0 / 12.0) <= 4.0 * variance_se

    def test_crypto_lemma(self, rng):
        """(V + D) mod L is uniform regardless of V: KS against fresh dithers."""
        lat = make_lattice("integer-cubic", 1)
        v = rng.normal(0.0, 5.0, size=(100_000, 1))
        masked = mod_lattice(lat, v + sample_dither(lat, rng, 100_000))[:, 0]
        reference = sample_dither(lat, rng, 100_000)[:, 0]

        assert stats.ks_2samp(masked, reference).pvalue >= 1e-3

    @pytest.mark.parametrize("family,dim", [("integer-cubic", 1), ("hexagonal", None)])
    def test_crypto_lemma_decorrelates_message(self, family, dim, rng):
        """Output mean does not track the message: |corr(v index, output)| <= 0.01."""
        lat = _lattice(family, dim)
        count = 1_000_000
        index = rng.integers(0, 100, size=count)
        v = np.outer(index * 0.37, np.ones(lat.n))
        masked = mod_lattice(lat, v + sample_dither(lat, rng, count))

        for coordinate in range(lat.n):
            assert abs(np.corrcoef(index, masked[:, coordinate])[0, 1]) <= 0.01


class TestSecondMoment:
    """Test second moments and normalised second moments."""

    @pytest.mark.parametrize("n", [1, 2, 4, 8])
    def test_integer_cubic_nsm_exact(self, n):
        """nsm(Z^n) = 1/12 exactly."""
        assert nsm(make_lattice("integer-cubic", n)) == 1.0 / 12.0

    def test_integer_cubic_scaled(self):
        """sigma2(cZ) = c^2/12 exactly, volume c."""
        lat = scale(make_lattice("integer-cubic", 1), 2.0)

        assert lat.volume == 2.0
        assert lat.sigma2 == pytest.approx(4.0 / 12.0, rel=1e-15)
        assert second_moment(lat).value == pytest.approx(4.0 / 12.0, rel=1e-15)
        assert second_moment(lat).samples == 0

    @pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
    @pytest.mark.parametrize("family,dim", FAMILIES)
    def test_nsm_scale_invariant(self, family, dim, c):
        """nsm(cL) = nsm(L)."""
        lat = _lattice(family, dim)

        assert nsm(scale(lat, c)) == pytest.approx(nsm(lat), rel=1e-12)

    def test_monte_carlo_needs_samples(self):
        """Fewer than 10^4 Monte-Carlo samples are refused."""
        lat = _lattice("hexagonal", None)

        with pytest.raises(ValueError):
            second_moment(lat, samples=100)

    @pytest.mark.slow
    def test_hexagonal_nsm(self):
        """nsm(A2) = 0.080188 within 0.0005 at 10^6 samples."""
        lat = make_lattice("hexagonal", samples=1_000_000, seed=1)

        assert lat.nsm == pytest.approx(0.080188, abs=5e-4)
        assert lat.sigma2_samples == 1_000_000

    @pytest.mark.parametrize("family,expected", [("D4", 0.076603), ("E8", 0.071682)])
    def test_known_nsm(self, family, expected):
        """D4 and E8 normalised second moments match published values."""
        lat = make_lattice(family, samples=200_000, seed=2)

        assert lat.nsm == pytest.approx(expected, abs=1e-3)

    def test_nsm_ordering(self):
        """Better quantisers have smaller nsm, all above 1/(2 pi e)."""
        chosen = [("integer-cubic", 1), ("hexagonal", None), ("E8", None)]
        values = [nsm(_lattice(f, d)) for f, d in chosen]

        assert values[0] > values[1] > values[2] > 1.0 / (2.0 * math.pi * math.e)

    def test_shaping_loss(self):
        """Z^n loses 0.5 log2(2 pi e / 12) ~ 0.254 bits."""
        lat = make_lattice("integer-cubic", 4)

        assert shaping_loss_bits(lat) == pytest.approx(0.5 * math.log2(2 * math.pi * math.e / 12))


class TestScale:
    """Test lattice scaling."""

    def test_identity(self):
        """c = 1 returns the same lattice."""
        lat = _lattice("D4", None)

        assert scale(lat, 1.0) is lat

    @pytest.mark.parametrize("c", [0.0, -2.0])
    def test_nonpositive_rejected(self, c):
        """Non-positive factors raise NonPositiveScaleError."""
        with pytest.raises(NonPositiveScaleError):
            scale(make_lattice("integer-cubic", 1), c)

    def test_sigma2_scales_quadratically(self):
        """sigma2(cL) = c^2 sigma2(L) for Monte-Carlo families."""
        lat = _lattice("hexagonal", None)

        assert scale(lat, 3.0).sigma2 == pytest.approx(9.0 * lat.sigma2, rel=1e-12)
        assert scale(lat, 3.0).volume == pytest.approx(9.0 * lat.volume, rel=1e-12)


class TestMakeLattice:
    """Test the family factory."""

    def test_fixed_dimension_enforced(self):
        """E8 exists only in dimension 8."""
        with pytest.raises(UnsupportedDimensionError):
            make_lattice("E8", 4)

    def test_unknown_family(self):
        """Unknown tags raise UnsupportedFamilyError."""
        with pytest.raises(UnsupportedFamilyError):
            make_lattice("leech", 24)

    def test_generic_dimension_limit(self):
        """Generic enumeration stops at n = 4."""
        with pytest.raises(UnsupportedDimensionError):
            make_lattice("generic", generator=np.eye(5))

    def test_generic_requires_generator(self):
        """Generic family without a basis raises BasisError."""
        with pytest.raises(BasisError):
            make_lattice("generic")

    def test_generic_rejects_singular_basis(self):
        """A rank-deficient generator raises BasisError."""
        with pytest.raises(BasisError):
            make_lattice("generic", generator=[[1.0, 2.0], [2.0, 4.0]])

    def test_family_enum_accepted(self):
        """LatticeFamily members work as tags."""
        assert make_lattice(LatticeFamily.INTEGER_CUBIC, 3).n == 3

    def test_estimate_is_cached_and_deterministic(self):
        """Same family, samples and seed give identical estimates."""
        first = make_lattice("D4", samples=20_000, seed=5)
        second = make_lattice("D4", samples=20_000, seed=5)

        assert first.sigma2 == second.sigma2


class TestEntropyAndNesting:
    """Test entropy helpers and the nesting check."""

    def test_dither_entropy(self):
        """A dither of 2Z has entropy log2 2 = 1 bit."""
        lat = scale(make_lattice("integer-cubic", 1), 2.0)

        assert dither_entropy_bits(lat) == pytest.approx(1.0)

    def test_good_lattice_entropy_upper_bounds_dither_entropy(self):
        """A Gaussian with the same second moment has more entropy."""
        for family, dim in FAMILIES:
            lat = _lattice(family, dim)

            assert good_lattice_entropy_bits(lat) > dither_entropy_bits(lat)

    def test_plugin_entropy_matches_log_volume(self, rng):
        """Histogram estimate of a 2Z dither is within 0.05 bits of 1."""
        lat = scale(make_lattice("integer-cubic", 1), 2.0)
        samples = sample_dither(lat, rng, 100_000)

        assert plugin_entropy_bits(samples) == pytest.approx(dither_entropy_bits(lat), abs=0.05)

    def test_is_sublattice(self):
        """4Z is nested in Z, 1.5Z is not."""
        fine = make_lattice("integer-cubic", 2)

        assert is_sublattice(fine, scale(fine, 4.0)) is True
        assert is_sublattice(fine, scale(fine, 1.5)) is False
        assert is_sublattice(fine, make_lattice("integer-cubic", 3)) is False
