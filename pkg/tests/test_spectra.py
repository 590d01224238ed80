import numpy as np
import pytest

from maskrd import masks, spectra
from conftest import brute_autocorr, brute_cross_term, random_mask_suite


def test_autocorr_singer6():
    a = spectra.autocorr(masks.singer_mask(6))
    assert a[0] == 31
    assert all(int(v) == 15 for v in a[1:])


def test_autocorr_comb63():
    a = spectra.autocorr(masks.comb_mask(63, 3))
    for k in range(63):
        assert int(a[k]) == (21 if k % 3 == 0 else 0)


def test_autocorr_matches_brute_force_and_symmetry():
    for m in random_mask_suite(30, seed=5):
        a = spectra.autocorr(m)
        assert list(a) == brute_autocorr(m.bits)
        assert all(int(a[k]) == int(a[m.n - k]) for k in range(1, m.n))


def test_autocorr_sum_identities_exact():
    for m in random_mask_suite(200, seed=17):
        a = spectra.autocorr(m)
        w = m.weight
        assert int(a[0]) == w
        assert int(a.sum()) == w * w
        assert int(a[1:].sum()) == w * (w - 1)


def test_cross_term_examples():
    s3 = masks.singer_mask(3)
    assert spectra.cross_term(s3, 1, 2) == 1
    a = spectra.autocorr(s3)
    for k in range(1, 7):
        assert spectra.cross_term(s3, k, k) == s3.weight - int(a[k])
    with pytest.raises(ValueError):
        spectra.cross_term(s3, 0, 2)
    with pytest.raises(ValueError):
        spectra.cross_term(s3, 2, 0)


def test_cross_term_matrix_matches_brute_force():
    for m in random_mask_suite(8, seed=23, lo=5, hi=24):
        r = spectra.cross_term_matrix(m)
        assert r.shape == (m.n, m.n)
        assert np.array_equal(r, r.T)
        for k in range(m.n):
            for l in range(m.n):
                assert r[k, l] == brute_cross_term(m.bits, k, l)
        assert np.all(r[0] == 0) and np.all(r[:, 0] == 0)
        assert r.min() >= 0 and r.max() <= m.n


def test_range_sidelobe_sum_identity():
    suite = [masks.singer_mask(3), masks.comb_mask(63, 3)]
    suite += random_mask_suite(40, seed=29)
    for m in suite:
        r = spectra.cross_term_matrix(m)[1:, 1:]
        off = int(r.sum() - np.trace(r))
        assert off == m.weight * (m.n - m.weight) * (m.weight - 1)


def test_gamma_properties():
    comb = masks.comb_mask(6, 3)
    assert spectra.gamma(comb, 3).values.sum() == 0
    s3 = masks.singer_mask(3)
    g1 = spectra.gamma(s3, 1)
    assert g1.total == 2  # w - a[1] = 3 - 1
    assert spectra.gamma(s3, 0).values.sum() == 0  # blind-range gate is empty
    for m in random_mask_suite(10, seed=31):
        a = spectra.autocorr(m)
        for k in range(1, m.n):
            assert spectra.gamma(m, k).total == m.weight - int(a[k])


def test_s_kn_zero_bin_is_real_count():
    for m in random_mask_suite(10, seed=37):
        a = spectra.autocorr(m)
        for k in (1, m.n - 1):
            v = spectra.s_kn(m, k, 0)
            assert v.imag == 0
            assert v.real == m.weight - int(a[k])


def test_s_kn_matches_fft_oracle():
    for m in random_mask_suite(6, seed=41, lo=5, hi=32):
        for k in (1, 2):
            g = spectra.gamma(m, k).values
            oracle = np.fft.fft(g.astype(float))
            mine = spectra.s_kn_all(m, k)
            assert np.allclose(mine, oracle, atol=1e-9 * m.n)
            for nu in range(m.n):
                assert spectra.s_kn(m, k, nu) == mine[nu]


def test_parseval_closed_form():
    suite = [masks.singer_mask(3), masks.singer_mask(4), masks.comb_mask(6, 3)]
    suite += random_mask_suite(10, seed=43, lo=5, hi=40)
    for m in suite:
        for k in range(1, m.n):
            direct = sum(abs(spectra.s_kn(m, k, nu)) ** 2
                         for nu in range(1, m.n))
            assert abs(direct - spectra.doppler_energy_f(m, k)) <= 1e-6 * m.n ** 2


def test_parseval_singer3_value():
    s3 = masks.singer_mask(3)
    for k in range(1, 7):
        direct = sum(abs(spectra.s_kn(s3, k, nu)) ** 2 for nu in range(1, 7))
        assert direct == pytest.approx(10, abs=1e-9)
        assert spectra.doppler_energy_f(s3, k) == 10


def test_doppler_energy_values():
    s6 = masks.singer_mask(6)
    for k in (1, 31, 62):
        assert spectra.doppler_energy_f(s6, k) == 16 * 47  # 752 at every delay
    energies = spectra.doppler_energy_all(s6)
    assert int(energies[0]) == 0
    assert all(int(v) == 752 for v in energies[1:])


def test_comb_blanked_delay_has_zero_spectrum():
    comb = masks.comb_mask(6, 3)
    assert all(spectra.s_kn(comb, 3, nu) == 0 for nu in range(6))
    assert spectra.doppler_energy_f(comb, 3) == 0
    assert spectra.doppler_energy_f(comb, 1) == 8  # f(0) = 2*4


def test_s_kmn_periodicity_reduction():
    s6 = masks.singer_mask(6)
    assert spectra.s_kmn(s6, 5, 50, 0) == 50 * (31 - 15)
    assert spectra.s_kmn(s6, 5, 50, 7) == 0
    assert spectra.s_kmn(s6, 5, 50, 73) == 0
    v = spectra.s_kmn(s6, 5, 50, 100)
    assert v == 50 * spectra.s_kn(s6, 5, 2)


def test_s_kmn_matches_tiled_fft_oracle():
    cases = [(masks.singer_mask(3), 4), (masks.comb_mask(6, 3), 5),
             (masks.random_mask(16, 5, 7), 8), (masks.singer_mask(5), 8)]
    for m, m_pri in cases:
        total = m_pri * m.n
        assert total <= 2048
        for k in (1, m.n - 1):
            tiled = np.tile(spectra.gamma(m, k).values.astype(float), m_pri)
            big = np.fft.fft(tiled)
            for nu in range(total):
                want = spectra.s_kmn(m, k, m_pri, nu)
                if nu % m_pri:
                    assert want == 0
                    assert abs(big[nu]) <= 1e-9 * total
                else:
                    assert abs(big[nu] - want) <= 1e-9 * max(1.0, abs(want))


def test_summary_invariants():
    m = masks.singer_mask(4)
    s = spectra.summarize(m)
    assert s.n == 15 and s.weight == 7
    assert int(s.a[0]) == s.weight
    assert int(s.a.sum()) == s.weight ** 2
    assert np.array_equal(s.r, s.r.T)
    assert s.rho == m.rho
