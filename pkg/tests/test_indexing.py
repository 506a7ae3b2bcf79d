import numpy as np
import pytest

from spherediff import indexing


@pytest.mark.parametrize("L", [1, 2, 3, 5, 8])
def test_spectral_entries_match_index(L):
    entries = indexing.spectral_entries(L)
    assert len(entries) == L * L
    for slot, (ell, m) in enumerate(entries):
        assert indexing.spectral_index(ell, m) == slot


@pytest.mark.parametrize("L", [1, 2, 3, 5, 8])
def test_chart_entries_match_index(L):
    entries = indexing.chart_entries(L)
    assert len(entries) == L * L
    for slot, (ell, m, part) in enumerate(entries):
        assert indexing.chart_index(ell, m, part) == slot


def test_spectral_ordering_per_degree():
    # within each degree: m = 0, +1, -1, +2, -2, ...
    assert indexing.spectral_entries(3) == [
        (0, 0),
        (1, 0), (1, 1), (1, -1),
        (2, 0), (2, 1), (2, -1), (2, 2), (2, -2),
    ]


def test_chart_slot_coincidence():
    # chart Re(a_{ell,m}) shares its slot with spectral (ell, m); Im with (ell, -m)
    for L in (2, 4, 6):
        for ell in range(L):
            assert indexing.chart_index(ell, 0, "re") == indexing.spectral_index(ell, 0)
            for m in range(1, ell + 1):
                assert indexing.chart_index(ell, m, "re") == indexing.spectral_index(ell, m)
                assert indexing.chart_index(ell, m, "im") == indexing.spectral_index(ell, -m)


def test_index_validation():
    with pytest.raises(ValueError):
        indexing.spectral_index(1, 2)
    with pytest.raises(ValueError):
        indexing.chart_index(1, 0, "im")  # m = 0 has no imaginary slot
    with pytest.raises(ValueError):
        indexing.chart_index(2, 1, "abs")


@pytest.mark.parametrize("L", [1, 2, 4, 8])
def test_mirror_permutation_involution(L):
    perm, sign = indexing.mirror_permutation(L)
    assert np.array_equal(perm[perm], np.arange(L * L))
    assert set(np.unique(sign)) <= {-1.0, 1.0}
    # applying the mirror map twice is the identity on any vector
    rng = np.random.default_rng(0)
    a = rng.standard_normal(L * L) + 1j * rng.standard_normal(L * L)
    mirrored = sign * np.conj(a[perm])
    twice = sign * np.conj(mirrored[perm])
    assert np.array_equal(twice, a)


def test_helper_arrays_consistent():
    L = 4
    ells = indexing.spectral_ells(L)
    ms = indexing.spectral_ms(L)
    for slot, (ell, m) in enumerate(indexing.spectral_entries(L)):
        assert ells[slot] == ell and ms[slot] == m
    cms = indexing.chart_ms(L)
    cim = indexing.chart_is_im(L)
    for slot, (ell, m, part) in enumerate(indexing.chart_entries(L)):
        assert cms[slot] == m
        assert cim[slot] == (part == "im")
