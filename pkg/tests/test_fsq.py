import itertools

import numpy as np
import pytest

from motionstream.codec.fsq import (
    code_index,
    codebook_size,
    dequantize,
    fsq_quantize,
    index_code,
    round_half_away,
    tokens_to_latents,
)

LEVELS = (8, 8, 8, 6, 5)


class TestQuantizer:
    def test_midpoint_odd_levels(self):
        assert fsq_quantize(np.zeros(5), (5, 5, 5, 5, 5)).tolist() == [2] * 5

    def test_tanh_saturation(self):
        z = np.array([10.0, 10.0, 10.0, 10.0, 10.0])
        assert fsq_quantize(z, LEVELS).tolist() == [7, 7, 7, 5, 4]

    def test_even_levels_rounding(self):
        # ((0+1)/2)*7 = 3.5 rounds half away from zero to 4
        z = np.zeros(5)
        assert fsq_quantize(z, (8, 8, 8, 8, 8)).tolist() == [4] * 5

    def test_round_half_away(self):
        assert round_half_away(np.array([0.5, 1.5, 2.5, -0.5, -1.5])).tolist() == [1.0, 2.0, 3.0, -1.0, -2.0]

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            fsq_quantize(np.array([np.nan, 0, 0, 0, 0]), LEVELS)

    def test_idempotent_on_dequantized(self, rng):
        # quantizing atanh of the normalized midpoints reproduces the code
        codes = rng.integers(0, np.array(LEVELS), size=(200, 5))
        q = dequantize(codes, LEVELS)
        z = np.arctanh(np.clip(q, -0.999999999, 0.999999999))
        again = fsq_quantize(z, LEVELS)
        assert np.array_equal(again, codes)

    def test_monotone_per_dimension(self):
        z = np.linspace(-4, 4, 400)
        for li, l in enumerate(LEVELS):
            zz = np.zeros((400, 5))
            zz[:, li] = z
            v = fsq_quantize(zz, LEVELS)[:, li]
            assert np.all(np.diff(v) >= 0)
            assert v.min() == 0 and v.max() == l - 1


class TestIndexing:
    def test_zero_code(self):
        assert code_index(np.zeros(5, dtype=int), LEVELS) == 0

    def test_least_significant_digit(self):
        assert code_index(np.array([0, 0, 0, 0, 1]), LEVELS) == 1

    def test_max_code(self):
        assert code_index(np.array([7, 7, 7, 5, 4]), LEVELS) == 15359

    def test_bijection_exhaustive_brute_force(self):
        # independent oracle: enumerate tuples in lexicographic order
        expected = 0
        for tup in itertools.product(*(range(l) for l in LEVELS)):
            assert code_index(np.array(tup), LEVELS) == expected
            assert index_code(expected, LEVELS).tolist() == list(tup)
            expected += 1
        assert expected == codebook_size(LEVELS) == 15360

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            index_code(15360, LEVELS)
        with pytest.raises(ValueError):
            index_code(-1, LEVELS)
        with pytest.raises(ValueError):
            code_index(np.array([8, 0, 0, 0, 0]), LEVELS)

    def test_music_codebook_size(self):
        assert codebook_size((8, 8, 8, 4, 3)) == 6144

    def test_dequantize_range(self, rng):
        toks = rng.integers(0, 15360, size=64)
        lat = tokens_to_latents(toks, LEVELS)
        assert lat.shape == (64, 5)
        assert lat.min() >= -1.0 and lat.max() <= 1.0
