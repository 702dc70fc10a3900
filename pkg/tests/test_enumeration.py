import numpy as np
import pytest

from siegel_kernel_lab import arithmetic as ar
from siegel_kernel_lab import enumeration as en
from siegel_kernel_lab.errors import AbsenceError, CacheFormatError
from siegel_kernel_lab.siegel import SiegelPoint, act, distance, random_point


class TestBfs:
    def test_length_zero(self):
        cache = en.bfs_enumerate(2, L=0)
        assert len(cache) == 1 and cache.elements[0].is_identity()

    def test_length_one(self):
        gens = en.standard_generators(2)
        cache = en.bfs_enumerate(2, L=1)
        assert len(cache) == 1 + len(set(gens)) == 9

    def test_no_duplicates(self, cache_l3):
        keys = {e.matrix.tobytes() for e in cache_l3}
        assert len(keys) == len(cache_l3)

    def test_all_certified(self, cache_l3):
        for e in cache_l3:
            ar.certify_symplectic(e.matrix)

    def test_monotone_in_length(self, cache_l2, cache_l3):
        assert set(cache_l2.elements) <= set(cache_l3.elements)
        assert cache_l3.elements[: len(cache_l2)] == cache_l2.elements

    def test_cap_truncates(self):
        cache = en.bfs_enumerate(2, L=4, cap=100)
        assert cache.truncated and len(cache) == 100

    def test_inverse_of_generators(self, cache_l2):
        for gen in en.standard_generators(2):
            assert gen.inverse() in cache_l2


class TestPersistence:
    def test_round_trip(self, tmp_path, cache_l2):
        path = tmp_path / "c.spgz"
        en.save_cache(cache_l2, path)
        assert path.read_text().startswith("SPGZ 1 g=2 L=2 gens=J+T\n")
        loaded = en.load_cache(path)
        assert loaded.same_elements(cache_l2) and loaded.L == 2

    def test_truncated_row(self, tmp_path, cache_l2):
        path = tmp_path / "c.spgz"
        en.save_cache(cache_l2, path)
        text = path.read_text()
        path.write_text(text[: len(text) // 2])
        with pytest.raises(CacheFormatError) as info:
            en.load_cache(path)
        assert info.value.row == len(text[: len(text) // 2].splitlines())

    def test_edited_entry(self, tmp_path, cache_l2):
        path = tmp_path / "c.spgz"
        en.save_cache(cache_l2, path)
        lines = path.read_text().splitlines()
        toks = lines[4].split()
        toks[0] = str(int(toks[0]) + 5)
        lines[4] = " ".join(toks)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(CacheFormatError) as info:
            en.load_cache(path)
        assert info.value.row == 5 and "not symplectic" in str(info.value)

    def test_duplicate_row(self, tmp_path, cache_l2):
        path = tmp_path / "c.spgz"
        en.save_cache(cache_l2, path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines + [lines[2]]) + "\n")
        with pytest.raises(CacheFormatError) as info:
            en.load_cache(path)
        assert info.value.row == len(lines) + 1

    def test_version_mismatch(self, tmp_path):
        path = tmp_path / "c.spgz"
        path.write_text("SPGZ 2 g=2 L=0 gens=J+T\n" + " ".join("1000010000100001") + "\n")
        with pytest.raises(CacheFormatError):
            en.load_cache(path)


class TestCounting:
    def test_zero_radius(self, cache_l2):
        z = SiegelPoint.scalar(1.0)
        assert en.count_gamma(cache_l2, en.CountQuery(z, z, 0.0)) == 0

    def test_below_shortest_orbit(self, cache_l2):
        z = SiegelPoint(np.array([[0.1, 0.05], [0.05, 0.2]]), np.diag([1.1, 1.3]))
        shortest = min(d for _, d in en.orbit_distances(cache_l2, z, z))
        assert en.count_gamma(cache_l2, en.CountQuery(z, z, shortest * 0.99)) == 0
        assert en.count_gamma(cache_l2, en.CountQuery(z, z, shortest * 1.01)) >= 1

    def test_monotone(self, rng, cache_l2):
        z, w = random_point(2, rng), random_point(2, rng)
        counts = [en.count_gamma(cache_l2, en.CountQuery(z, w, r)) for r in (0.5, 1, 2, 4, 8)]
        assert counts == sorted(counts)

    def test_arithmetic_mode_excludes_cusp(self, cache_l2):
        z = SiegelPoint.scalar(1.0)
        cocompact = en.count_gamma(cache_l2, en.CountQuery(z, z, 50.0))
        arithmetic = en.count_gamma(cache_l2, en.CountQuery(z, z, 50.0, en.ARITHMETIC))
        n_cusp = sum(1 for e in cache_l2 if ar.in_gamma_inf(e) and not e.acts_trivially())
        assert cocompact - arithmetic == n_cusp

    def test_bad_mode(self):
        z = SiegelPoint.scalar(1.0)
        with pytest.raises(ValueError):
            en.CountQuery(z, z, 1.0, "other")

    def test_dirichlet_interior(self, rng, cache_l3):
        z = SiegelPoint.scalar(1.3)
        for _ in range(10):
            eps = rng.normal(scale=0.02, size=(2, 2))
            w = SiegelPoint(z.X + (eps + eps.T) / 2, z.Y)
            best = min(cache_l3, key=lambda g: distance(z, act(g, w)))
            assert best.acts_trivially()


class TestInjectivity:
    def test_identity_only(self):
        with pytest.raises(AbsenceError):
            en.injectivity_radius_estimate(en.bfs_enumerate(2, L=0), [SiegelPoint.scalar(1.0)])

    def test_translations_only(self):
        eye = ar.identity(2)
        t = [ar.translation(np.array(s)) for s in ([[1, 0], [0, 0]], [[0, 1], [1, 0]])]
        cache = en.GroupCache(2, "T", 1, [eye] + t)
        z = SiegelPoint.scalar(1.0)
        est = en.injectivity_radius_estimate(cache, [z])
        want = min(distance(z, act(g, z)) for g in t) / 2
        assert est.value == pytest.approx(want) and est.upper_bound

    def test_weakly_decreasing_in_length(self, rng):
        samples = [random_point(2, rng) for _ in range(2)]
        values = [en.injectivity_radius_estimate(en.bfs_enumerate(2, L=L), samples).value
                  for L in (1, 2, 3)]
        assert values[0] >= values[1] >= values[2]

    def test_elliptic_fixed_points_skipped(self, cache_l2):
        est = en.injectivity_radius_estimate(cache_l2, [SiegelPoint.scalar(1.0)])
        assert est.fixed >= 1 and est.value > 0
