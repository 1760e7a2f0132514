import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fastrpb import spectral
from fastrpb.errors import SpectralResidueError
from fastrpb.spectral import circular_convolve, dft_naive, fft_forward, fft_inverse

from _oracles import circular_direct, dft_mp, rel_err


def _rand_complex(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


class TestDftNaive:
    def test_delta_gives_flat_spectrum(self):
        np.testing.assert_allclose(dft_naive([1, 0, 0, 0]), [1, 1, 1, 1], atol=1e-15)

    def test_constant_gives_scaled_delta(self):
        np.testing.assert_allclose(dft_naive([1, 1, 1, 1]), [4, 0, 0, 0], atol=1e-14)

    def test_matches_extended_precision_summation(self, rng):
        x = _rand_complex(rng, 8)
        assert rel_err(dft_naive(x), dft_mp(x)) < 1e-14

    def test_non_power_of_two_lengths(self, rng):
        x = _rand_complex(rng, 7)
        assert rel_err(dft_naive(x), dft_mp(x)) < 1e-14

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            dft_naive([])


class TestFftForward:
    def test_delta(self):
        np.testing.assert_allclose(fft_forward([1, 0, 0, 0]), [1, 1, 1, 1], atol=0)

    def test_zero(self):
        assert np.all(fft_forward(np.zeros(16)) == 0)

    def test_length_one_is_identity(self):
        assert fft_forward([3.5 - 1j])[0] == 3.5 - 1j

    @pytest.mark.parametrize("n", [2**k for k in range(13)])
    def test_matches_naive_dft(self, rng, n):
        x = _rand_complex(rng, n)
        assert rel_err(fft_forward(x), dft_naive(x)) < 1e-10

    def test_against_mpmath_small(self, rng):
        x = _rand_complex(rng, 16)
        assert rel_err(fft_forward(x), dft_mp(x)) < 1e-14

    def test_batched_rows_transform_independently(self, rng):
        X = rng.standard_normal((3, 32)) + 0j
        out = fft_forward(X)
        for i in range(3):
            np.testing.assert_array_equal(out[i], fft_forward(X[i]))

    @pytest.mark.parametrize("n", [3, 6, 12, 1000])
    def test_non_power_of_two_rejected(self, n):
        with pytest.raises(ValueError, match="power of two"):
            fft_forward(np.zeros(n))

    def test_input_not_modified(self, rng):
        x = _rand_complex(rng, 64)
        keep = x.copy()
        fft_forward(x)
        np.testing.assert_array_equal(x, keep)


class TestFftInverse:
    def test_inverse_of_constant_case(self):
        np.testing.assert_allclose(fft_inverse([4, 0, 0, 0]), [1, 1, 1, 1], atol=1e-15)

    def test_round_trip_256(self, rng):
        x = _rand_complex(rng, 256)
        assert np.max(np.abs(fft_inverse(fft_forward(x)) - x)) < 1e-12

    def test_basis_vector(self):
        e3 = np.zeros(8)
        e3[3] = 1.0
        # spectrum of e_3 from the extended-precision oracle
        np.testing.assert_allclose(fft_inverse(dft_mp(e3)), e3, atol=1e-15)
        np.testing.assert_allclose(fft_inverse(fft_forward(e3)), e3, atol=1e-15)

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ValueError):
            fft_inverse(np.zeros(5))


class TestInvariants:
    @pytest.mark.parametrize("n", [2**k for k in range(13)])
    def test_round_trip_all_lengths(self, rng, n):
        x = _rand_complex(rng, n)
        assert np.max(np.abs(fft_inverse(fft_forward(x)) - x)) < 1e-12

    @settings(max_examples=50, deadline=None)
    @given(
        k=st.integers(0, 10),
        alpha=st.floats(-10, 10),
        beta=st.floats(-10, 10),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_linearity(self, k, alpha, beta, seed):
        rng = np.random.default_rng(seed)
        n = 2**k
        x, y = _rand_complex(rng, n), _rand_complex(rng, n)
        lhs = fft_forward(alpha * x + beta * y)
        rhs = alpha * fft_forward(x) + beta * fft_forward(y)
        scale = max(1.0, np.max(np.abs(rhs)))
        assert np.max(np.abs(lhs - rhs)) <= 1e-10 * scale

    @settings(max_examples=50, deadline=None)
    @given(x=arrays(np.float64, st.sampled_from([1, 2, 4, 64, 512]), elements=st.floats(-1e3, 1e3)))
    def test_parseval(self, x):
        e = np.sum(np.abs(x) ** 2)
        X = fft_forward(x)
        assert abs(e - np.sum(np.abs(X) ** 2) / len(x)) <= 1e-9 * max(e, 1e-300)

    @settings(max_examples=50, deadline=None)
    @given(x=arrays(np.float64, st.sampled_from([1, 8, 128, 4096]), elements=st.floats(-1e3, 1e3)))
    def test_round_trip_property(self, x):
        back = fft_inverse(fft_forward(x))
        assert np.max(np.abs(back - x)) <= 1e-12 * max(1.0, np.max(np.abs(x)))

    def test_twiddle_tables_are_cached_and_read_only(self):
        a = spectral._twiddles(64)
        assert spectral._twiddles(64) is a
        assert not a.flags.writeable


class TestCircularConvolve:
    def test_delta_identity(self):
        np.testing.assert_allclose(circular_convolve([1, 0, 0], [5, 6, 7]), [5, 6, 7], atol=1e-14)

    def test_two_element_example(self):
        # direct summation: c0 = 1*2 + 1*3, c1 = 1*3 + 1*2
        expected = circular_direct([1, 1], [2, 3])
        np.testing.assert_array_equal(expected, [5, 5])
        np.testing.assert_allclose(circular_convolve([1, 1], [2, 3]), expected, atol=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 16, 17, 31, 64, 100])
    def test_matches_direct_summation(self, rng, n):
        a, b = rng.standard_normal((2, n))
        assert rel_err(circular_convolve(a, b), circular_direct(a, b)) < 1e-10

    def test_commutative(self, rng):
        a, b = rng.standard_normal((2, 17))
        np.testing.assert_allclose(circular_convolve(a, b), circular_convolve(b, a), atol=1e-13)

    def test_convolution_theorem(self, rng):
        a, b = rng.standard_normal((2, 32))
        via_spectra = fft_inverse(fft_forward(a) * fft_forward(b)).real
        np.testing.assert_allclose(circular_convolve(a, b), via_spectra, atol=1e-13)

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ValueError, match="mismatch"):
            circular_convolve([1, 2], [1, 2, 3])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            circular_convolve([], [])

    def test_imaginary_residue_guard(self):
        with pytest.raises(SpectralResidueError):
            spectral.take_real(np.array([1.0 + 1e-3j]))
