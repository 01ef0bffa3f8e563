import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from photonkin import wavepacket as w
from photonkin.errors import AliasError, DomainTooSmall, ResolutionError, WrapAroundError


@pytest.fixture(scope="module")
def grid():
    return w.Grid1D(4096, -40.0, 40.0)


def l2(a, b, dx):
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2) * dx))


class TestGrid:
    def test_derived(self, grid):
        assert grid.dx == 80 / 4096
        assert grid.x[0] == -40 and grid.x[-1] == pytest.approx(40 - grid.dx)

    @pytest.mark.parametrize("n", [32, 100, 1000])
    def test_power_of_two(self, n):
        with pytest.raises(ValueError):
            w.Grid1D(n, 0, 1)

    def test_ordering(self):
        with pytest.raises(ValueError):
            w.Grid1D(64, 1, 1)


class TestInit:
    def test_symmetric_real(self, grid):
        wp = w.init_gaussian(grid, 1.0, 0.0)
        assert np.all(wp.psi.imag == 0)
        assert w.position_mean(wp) == pytest.approx(0, abs=1e-14)
        assert wp.norm2() == pytest.approx(1, abs=1e-14)

    def test_mean_wavenumber(self, grid):
        k_mean, _ = w.spectral_moments(w.init_gaussian(grid, 1.0, 0.5))
        assert abs(k_mean - 0.5) < 1e-10

    @pytest.mark.parametrize("a", [1.0, 2.0])
    def test_spectral_width(self, grid, a):
        _, var = w.spectral_moments(w.init_gaussian(grid, a, 0.0))
        assert var == pytest.approx(1 / (2 * a * a), rel=1e-10)

    def test_guards(self):
        with pytest.raises(ResolutionError):
            w.init_gaussian(w.Grid1D(64, -40, 40), 1.0, 0.0)
        with pytest.raises(AliasError):
            w.init_gaussian(w.Grid1D(4096, -40, 40), 1.0, 200.0)
        with pytest.raises(DomainTooSmall):
            w.init_gaussian(w.Grid1D(4096, -5, 5), 1.0, 0.0)

    def test_forward_fraction_against_erf(self):
        from scipy.special import erf

        # |psi_hat|^2 is a Gaussian of variance 1/(2a^2) centred at k0; the
        # half-line mode sum differs from the integral by O(dk^2)
        exact = 0.5 * (1 + erf(0.5))
        errs = []
        for L, n in ((80.0, 4096), (320.0, 16384)):
            g = w.Grid1D(n, -L / 2, L / 2)
            errs.append(abs(w.forward_fraction(w.init_gaussian(g, 1.0, 0.5)) - exact))
        assert errs[0] < 3e-4
        assert errs[0] / errs[1] == pytest.approx(16, rel=0.1)


class TestOperator:
    def test_plane_wave(self, grid):
        k = grid.k[17]
        wp = w.WavePacket1D(grid, np.exp(1j * k * grid.x))
        out = w.sqrt_laplacian_apply(wp)
        assert np.abs(out.psi - abs(k) * wp.psi).max() < 1e-12

    def test_constant(self, grid):
        out = w.sqrt_laplacian_apply(w.WavePacket1D(grid, np.ones(grid.n_points, complex)))
        assert np.abs(out.psi).max() < 1e-14

    def test_square_is_laplacian(self, grid):
        wp = w.init_gaussian(grid, 1.0, 0.5)
        twice = w.sqrt_laplacian_apply(w.sqrt_laplacian_apply(wp))
        neg_d2 = w.spectral_second_derivative(wp)
        assert np.abs(twice.psi + neg_d2.psi).max() < 1e-12

    def test_energy_positive(self, grid):
        rng = np.random.default_rng(0)
        for _ in range(5):
            psi = rng.normal(size=grid.n_points) + 1j * rng.normal(size=grid.n_points)
            assert w.energy(w.WavePacket1D(grid, psi)) > 0


class TestEvolve:
    def test_identity(self, grid):
        wp = w.init_gaussian(grid, 1.0, 0.5)
        np.testing.assert_array_equal(w.evolve(wp, 0.0).psi, wp.psi)

    @settings(max_examples=20, deadline=None)
    @given(t1=st.floats(-12, 12), t2=st.floats(-12, 12), k0=st.floats(-2, 2))
    def test_group_and_unitarity(self, t1, t2, k0):
        grid = w.Grid1D(1024, -40.0, 40.0)
        wp = w.init_gaussian(grid, 1.0, k0)
        a = w.evolve(w.evolve(wp, t1), t2)
        b = w.evolve(wp, t1 + t2)
        assert l2(a.psi, b.psi, grid.dx) < 1e-12
        assert abs(a.norm2() - 1) < 1e-12
        assert a.t == pytest.approx(t1 + t2)

    def test_wrap_guard(self, grid):
        wp = w.init_gaussian(grid, 1.0, 0.0)
        with pytest.raises(WrapAroundError):
            w.evolve(wp, 30.0)
        with pytest.raises(WrapAroundError):
            w.evolve(w.evolve(wp, 20.0), 10.0)

    def test_wave_equation(self, grid):
        wp = w.init_gaussian(grid, 1.0, 0.5)
        mid = w.evolve(wp, 5.0)
        res = []
        for h in (0.02, 0.01):
            d2t = (w.evolve(mid, h).psi - 2 * mid.psi + w.evolve(mid, -h).psi) / h**2
            res.append(np.abs(d2t - w.spectral_second_derivative(mid).psi).max())
        assert np.log2(res[0] / res[1]) == pytest.approx(2.0, abs=0.1)

    def test_two_symmetric_peaks(self, grid):
        out = w.evolve(w.init_gaussian(grid, 1.0, 0.0), 10.0)
        peaks = w.peak_report(out)
        assert len(peaks) == 2
        assert peaks[0].position == pytest.approx(-peaks[1].position)
        assert peaks[0].height == pytest.approx(peaks[1].height, rel=1e-12)
        for pk in peaks:
            assert abs(abs(pk.position) - 10) < 0.2
            assert pk.mass == pytest.approx(0.5, abs=1e-6)

    def test_peak_speed(self):
        # the peaks lag the light cone by ~1/t, so measure once they are well separated
        grid = w.Grid1D(8192, -80.0, 80.0)
        wp = w.init_gaussian(grid, 1.0, 0.0)
        dt = 20.0
        a = w.peak_report(w.evolve(wp, 20.0))
        b = w.peak_report(w.evolve(wp, 20.0 + dt))
        for pa, pb in zip(a, b):
            assert abs(abs(pb.position - pa.position) / dt - 1) <= 2 * grid.dx / dt

    def test_asymmetric_split(self, grid):
        wp = w.init_gaussian(grid, 1.0, 0.5)
        peaks = w.peak_report(w.evolve(wp, 10.0))
        assert len(peaks) == 2
        left, right = peaks
        assert right.mass > left.mass
        assert left.mass + right.mass == pytest.approx(1, abs=1e-12)
        # basin masses track the forward fraction up to the overlap of the 1/x tails
        assert right.mass == pytest.approx(w.forward_fraction(wp), abs=5e-3)

    def test_polynomial_tails(self, grid):
        # the positive-energy kernel spreads a ~1/x^2 density tail ahead of the light cone
        out = w.evolve(w.init_gaussian(grid, 1.0, 0.0), 10.0)
        rho = w.probability_density(out)
        x = grid.x
        outside = np.sum(rho[np.abs(x) > 15]) * grid.dx
        assert 1e-3 < outside < 0.1
        sel = (np.abs(x) > 16) & (np.abs(x) < 24)
        slope = np.polyfit(np.log(np.abs(x[sel]) - 10), np.log(rho[sel]), 1)[0]
        assert -2.6 < slope < -1.5

    def test_center_depletes(self, grid):
        wp = w.init_gaussian(grid, 1.0, 0.0)
        rho = [w.probability_density(w.evolve(wp, t))[grid.n_points // 2] for t in (0, 2, 5, 10)]
        assert np.all(np.diff(rho) < 0)


class TestReconstruction:
    def test_zero_time(self, grid):
        wp = w.init_gaussian(grid, 1.0, 0.5)
        np.testing.assert_array_equal(w.dalembert_reconstruct(wp, 0.0).psi, wp.psi)

    @pytest.mark.parametrize("k0,t", [(0.5, 10.0), (0.0, 7.0), (-1.0, 3.0)])
    def test_matches_evolution(self, grid, k0, t):
        wp = w.init_gaussian(grid, 1.0, k0)
        assert l2(w.dalembert_reconstruct(wp, t).psi, w.evolve(wp, t).psi, grid.dx) < 1e-8

    def test_positive_momentum_translates(self, grid):
        # spectrum on k > 0 only: the packet moves rigidly to the right
        wp = w.init_gaussian(grid, 1.0, 8.0)
        k = grid.k
        psi_hat = np.fft.fft(wp.psi)
        psi_hat[k <= 0] = 0
        pos = w.WavePacket1D(grid, np.fft.ifft(psi_hat), 0.0, 1.0, 8.0)
        t = 10.0
        shifted = np.fft.ifft(psi_hat * np.exp(-1j * k * t))
        assert l2(w.dalembert_reconstruct(pos, t).psi, shifted, grid.dx) < 1e-8
        i = np.argmax(np.abs(shifted))
        assert grid.x[i] == pytest.approx(t, abs=2 * grid.dx)

    def test_wrap_guard(self, grid):
        with pytest.raises(WrapAroundError):
            w.dalembert_reconstruct(w.init_gaussian(grid, 1.0, 0.0), 35.0)


class TestDensity:
    def test_normalised(self, grid):
        wp = w.evolve(w.init_gaussian(grid, 1.0, 0.5), 10.0)
        assert np.sum(w.probability_density(wp)) * grid.dx == pytest.approx(1, abs=1e-12)

    def test_single_peak_at_start(self, grid):
        peaks = w.peak_report(w.init_gaussian(grid, 1.0, 0.0))
        assert len(peaks) == 1 and peaks[0].position == 0.0
        assert peaks[0].mass == pytest.approx(1, abs=1e-12)

    def test_width_diagnostic(self, grid):
        wp = w.init_gaussian(grid, 1.0, 0.0)
        # |psi|^2 = exp(-x^2/a^2): FWHM = 2 a sqrt(ln 2)
        assert w.peak_report(wp)[0].width == pytest.approx(2 * np.sqrt(np.log(2)), rel=1e-4)
        widths = [pk.width for t in (10.0, 20.0) for pk in w.peak_report(w.evolve(wp, t))]
        assert np.ptp(widths) < 0.05

    def test_two_maxima_above_threshold(self, grid):
        rho = w.probability_density(w.evolve(w.init_gaussian(grid, 1.0, 0.5), 10.0))
        assert len(w.peak_report(w.WavePacket1D(grid, np.sqrt(rho)), 0.05)) == 2
