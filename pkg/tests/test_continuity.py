import itertools

import numpy as np
import pytest
from scipy.linalg import expm, subspace_angles
from scipy.stats import ortho_group

from conftest import random_rotation
from incpca.config import PcaConfig
from incpca.continuity import (
    CROSSING,
    REBASE,
    SIGN,
    TrackerState,
    align_degenerate_block,
    align_signs,
    crossing_window,
    detect_degenerate_groups,
    discontinuity_decomposition,
    match_components,
    track,
)
from incpca.eigen import EigenState
from incpca.engine import IncrementalPCA
from incpca.errors import DimensionError
from incpca.generators import crossing_stream


def groups_as_lists(partition):
    return [list(g) for g in partition.groups]


class TestDetectGroups:
    def test_separated(self):
        assert groups_as_lists(detect_degenerate_groups([3, 2, 1], 1e-6)) == [[0], [1], [2]]

    def test_near_tie(self):
        p = detect_degenerate_groups([2, 1 + 1e-9, 1, 0.5], 1e-6)
        assert groups_as_lists(p) == [[0], [1, 2], [3]]

    def test_empty(self):
        assert detect_degenerate_groups([], 1e-6).groups == ()

    def test_all_zero_uses_floor(self):
        assert groups_as_lists(detect_degenerate_groups([0, 0, 0], 1e-6)) == [[0, 1, 2]]

    @pytest.mark.parametrize("seed", range(20))
    def test_transitive_closure_of_gap_predicate(self, seed):
        rng = np.random.default_rng(seed)
        lam = np.sort(rng.choice([1.0, 1.0 + 1e-8, 2.0, 2.0 - 3e-9, 0.3], 7))[::-1]
        lam = lam + rng.uniform(0, 1e-9, 7) * rng.integers(0, 2, 7)
        lam = np.sort(lam)[::-1]
        eps = 1e-6
        thr = eps * max(lam[0], 1e-12)
        # union-find over the pairwise "adjacent and close" relation
        parent = list(range(7))

        def find(i):
            while parent[i] != i:
                i = parent[i]
            return i

        for i, j in itertools.combinations(range(7), 2):
            if j == i + 1 and lam[i] - lam[j] < thr:
                parent[find(j)] = find(i)
        expected = {}
        for i in range(7):
            expected.setdefault(find(i), []).append(i)
        assert groups_as_lists(detect_degenerate_groups(lam, eps)) == sorted(expected.values())


class TestAlignSigns:
    def test_flip(self):
        np.testing.assert_array_equal(align_signs([1, 0], [-1, 0]), [1, 0])

    def test_already_aligned(self):
        np.testing.assert_array_equal(align_signs([1, 0], [0.8, 0.6]), [0.8, 0.6])

    def test_orthogonal_keeps(self):
        np.testing.assert_array_equal(align_signs([1, 0], [0, -1]), [0, -1])


def state(rows, vals):
    return TrackerState.initial(EigenState(np.asarray(vals, float), np.asarray(rows, float)))


def perturbed(rng, rows, eps):
    m = rows.shape[0]
    a = rng.normal(size=(m, m)) * eps
    return rows @ expm(a - a.T).T


class TestMatch:
    def test_constructed_crossing(self):
        prev = state(np.eye(2), [2, 1])
        new = EigenState(np.array([2.05, 1.95]), np.array([[0.0, 1.0], [1.0, 0.0]]))
        part = detect_degenerate_groups(new.eigenvalues, 1e-6)
        np.testing.assert_array_equal(match_components(prev, new, part), [1, 0])

    def test_no_change(self, rng):
        rows = random_rotation(rng, 5)
        prev = state(rows, [5, 4, 3, 2, 1])
        new = EigenState(np.array([5.1, 4, 3, 2, 1.0]), perturbed(rng, rows, 1e-3))
        part = detect_degenerate_groups(new.eigenvalues, 1e-6)
        np.testing.assert_array_equal(match_components(prev, new, part), np.arange(5))

    @pytest.mark.parametrize("seed", range(40))
    def test_greedy_equals_exhaustive_on_near_permutations(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(2, 6))
        rows = random_rotation(rng, m)
        prev = state(rows, np.arange(m, 0, -1.0))
        # swap a random adjacent pair (or nothing), wiggle, random signs
        order = np.arange(m)
        k = int(rng.integers(0, m))
        if k < m - 1:
            order[[k, k + 1]] = order[[k + 1, k]]
        new_rows = perturbed(rng, rows[order], 0.05) * rng.choice([-1.0, 1.0], (m, 1))
        lam = np.arange(m, 0, -1.0)
        if m >= 3 and rng.random() < 0.5:
            lam[1] = lam[2] + 1e-9  # a degenerate pair widens the window
        new = EigenState(lam, new_rows)
        part = detect_degenerate_groups(lam, 1e-6)
        allowed = crossing_window(part, m)
        score = np.abs(new_rows @ rows.T)

        perm = match_components(prev, new, part)
        got = score[np.arange(m), perm].sum()
        best = max(
            score[np.arange(m), list(p)].sum()
            for p in itertools.permutations(range(m))
            if all(allowed[i, p[i]] for i in range(m))
        )
        assert sorted(perm) == list(range(m))
        assert got == pytest.approx(best, abs=1e-12)


class TestAlignBlock:
    def test_one_row_is_sign(self, rng):
        prev = rng.normal(size=(1, 4))
        new = -prev + 0.01 * rng.normal(size=(1, 4))
        np.testing.assert_array_equal(align_degenerate_block(prev, new)[0], align_signs(prev[0], new[0]))

    def test_permuted_plane(self):
        out = align_degenerate_block([[1, 0, 0], [0, 1, 0]], [[0, 1, 0], [1, 0, 0]])
        np.testing.assert_allclose(out, [[1, 0, 0], [0, 1, 0]], atol=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            align_degenerate_block(np.eye(3)[:2], np.eye(3))

    @pytest.mark.parametrize("seed", range(3))
    def test_beats_random_orthogonal_transforms(self, seed):
        rng = np.random.default_rng(seed)
        basis = random_rotation(rng, 5)
        prev = basis[:2]
        new = random_rotation(rng, 2) @ perturbed(rng, basis, 0.05)[:2]
        best = np.linalg.norm(align_degenerate_block(prev, new) - prev)
        rs = ortho_group.rvs(2, size=10_000, random_state=rng)
        flips = rng.choice([-1.0, 1.0], 10_000)
        rs[:, 1, :] *= flips[:, None]  # include reflections
        trials = np.linalg.norm(rs @ new - prev, axis=(1, 2))
        assert best <= trials.min() + 1e-12

    def test_span_preserved(self, rng):
        basis = random_rotation(rng, 6)
        new = random_rotation(rng, 3) @ basis[1:4]
        out = align_degenerate_block(basis[1:4] + 0.1 * rng.normal(size=(3, 6)), new)
        assert subspace_angles(out.T, new.T).max() <= 1e-8
        np.testing.assert_allclose(out @ out.T, np.eye(3), atol=1e-12)


class TestTrack:
    def test_fixed_point(self, rng):
        eig = EigenState(np.array([3.0, 2.0, 1.0]), random_rotation(rng, 3))
        out_state, out = track(TrackerState.initial(eig), eig, 1e-6)
        np.testing.assert_array_equal(out.loadings, eig.loadings)
        assert out_state.last_corrections == ()

    def test_single_sign_flip(self, rng):
        eig = EigenState(np.array([3.0, 2.0, 1.0]), random_rotation(rng, 3))
        flipped = eig.loadings.copy()
        flipped[1] *= -1
        st, out = track(TrackerState.initial(eig), EigenState(eig.eigenvalues, flipped), 1e-6)
        np.testing.assert_array_equal(out.loadings, eig.loadings)
        assert [(c.kind, c.indices) for c in st.last_corrections] == [(SIGN, (1,))]

    def test_degenerate_block_rebased(self, rng):
        rows = random_rotation(rng, 4)
        eig = EigenState(np.array([3.0, 1.0, 1.0, 0.5]), rows)
        turned = rows.copy()
        turned[1:3] = random_rotation(rng, 2) @ rows[1:3]
        st, out = track(TrackerState.initial(eig), EigenState(eig.eigenvalues, turned), 1e-6)
        np.testing.assert_allclose(out.loadings, rows, atol=1e-12)
        assert [c.kind for c in st.last_corrections] == [REBASE]

    def test_dimension_mismatch(self, rng):
        eig = EigenState(np.array([2.0, 1.0]), np.eye(2))
        with pytest.raises(DimensionError):
            track(TrackerState.initial(eig), EigenState(np.ones(3), np.eye(3)), 1e-6)

    def test_eigenvalues_kept_as_multiset(self, rng):
        x = rng.normal(size=(200, 5)) @ rng.normal(size=(5, 5))
        eng = IncrementalPCA.warmup(x[:6], PcaConfig(m=5))
        for row in x[6:]:
            res = eng.push(row)
            np.testing.assert_array_equal(np.sort(res.eigenvalues), np.sort(np.maximum(eng.raw.eigenvalues, 0)))


def consecutive_dots(loadings):
    return np.einsum("kij,kij->ki", loadings[1:], loadings[:-1])


def run_loadings(x, continuity, **kw):
    eng = IncrementalPCA.warmup(x[:3], PcaConfig(m=x.shape[1], continuity=continuity, **kw))
    out = [eng.loadings.copy()]
    logs = []
    for row in x[3:]:
        res = eng.push(row)
        out.append(eng.loadings.copy())
        logs.extend(res.corrections)
    return np.array(out), logs


@pytest.mark.parametrize("seed", [1, 2, 5])
def test_two_variable_crossing(seed):
    sc = crossing_stream(2, 400, seed)
    tracked, logs = run_loadings(sc.data, True)
    raw, _ = run_loadings(sc.data, False)
    assert consecutive_dots(tracked).min() > 0.9
    assert np.abs(consecutive_dots(raw)).min() < 0.5
    swaps = [c for c in logs if c.kind == CROSSING]
    assert len(swaps) == 1
    assert abs(swaps[0].step - sc.info["crossing_step"]) <= 2


class TestDecomposition:
    def test_same_loadings(self, rng):
        c = random_rotation(rng, 3)
        _, coef = discontinuity_decomposition(rng.normal(size=3), rng.normal(size=3), c, c)
        np.testing.assert_array_equal(coef, 0)

    def test_same_sample(self, rng):
        z = rng.normal(size=3)
        sample, _ = discontinuity_decomposition(z, z, random_rotation(rng, 3), random_rotation(rng, 3))
        np.testing.assert_array_equal(sample, 0)

    def test_sums_to_difference(self, rng):
        z0, z1 = rng.normal(size=(2, 6))
        c0, c1 = random_rotation(rng, 6), random_rotation(rng, 6)
        s, k = discontinuity_decomposition(z0, z1, c0, c1)
        np.testing.assert_allclose(s + k, z1 @ c1.T - z0 @ c0.T, atol=1e-12)

    def test_dimension(self):
        with pytest.raises(DimensionError):
            discontinuity_decomposition(np.ones(3), np.ones(2), np.eye(3), np.eye(3))
