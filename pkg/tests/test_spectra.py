"""Zero finding: seeds, Newton refinement, argument-principle certification."""

import numpy as np
import pytest

import isobispec.spectra as spectra_mod
from isobispec.charfn import make_evaluator
from isobispec.errors import LeftTrustRegion
from isobispec.potential import build_potential
from isobispec.spectra import (Rect, count_zeros, find_spectrum, refine,
                               residual_bound, seeds)


class TestSeeds:
    def test_values(self):
        assert seeds(0, 3) == [1.0, 2.0, 3.0]
        assert seeds(1, 3) == [0.5, 1.5, 2.5]
        with pytest.raises(ValueError):
            seeds(0, 0)


class TestRefine:
    def test_zero_potential_exact(self, q_zero):
        ev = make_evaluator(q_zero)
        assert abs(refine(ev, 0, 2.0) - 4.0) <= 1e-10
        assert abs(refine(ev, 1, 2.5) - 6.25) <= 1e-10

    def test_converges_quickly_from_good_seed(self, q_zero, monkeypatch):
        # three Newton iterations at most from the asymptotic seed
        calls = {"n": 0}
        ev = make_evaluator(q_zero)
        orig = spectra_mod._FUNCS["delta"]

        def counting(ev_, j_, lam_):
            calls["n"] += 1
            return orig(ev_, j_, lam_)

        monkeypatch.setitem(spectra_mod._FUNCS, "delta", counting)
        lam = refine(ev, 0, 3.0)
        assert abs(lam - 9.0) <= 1e-10
        assert calls["n"] <= 4          # one batched eval per iteration

    def test_leaves_trust_region(self, q_zero):
        ev = make_evaluator(q_zero)
        re_max, _ = ev.rho_trust
        with pytest.raises(LeftTrustRegion):
            refine(ev, 0, re_max * 1.05)


class TestCountZeros:
    def test_zero_potential_rects(self, q_zero):
        ev = make_evaluator(q_zero)
        assert count_zeros(ev, 0, Rect(0.5, 3.5, -0.5, 0.5)) == 3
        assert count_zeros(ev, 1, Rect(0.6, 3.6, -0.5, 0.5)) == 3

    def test_empty_rect(self, q_zero):
        ev = make_evaluator(q_zero)
        assert count_zeros(ev, 0, Rect(0.2, 0.8, -0.3, 0.3)) == 0

    def test_contour_through_zero_retries(self, q_zero):
        # right edge sits exactly on the root rho = 2; the retry shift must
        # produce some integer count without raising
        ev = make_evaluator(q_zero)
        n = count_zeros(ev, 0, Rect(1.5, 2.0, -0.5, 0.5))
        assert n in (0, 1)


class TestFindSpectrum:
    def test_zero_potential_exactness(self, q_zero):
        ev = make_evaluator(q_zero)
        sp0 = find_spectrum(ev, 0, 15)
        assert len(sp0.eigenvalues) == 15
        for n, lam in enumerate(sp0.eigenvalues, start=1):
            assert abs(lam - n * n) <= 1e-10
        sp1 = find_spectrum(ev, 1, 15)
        for n, lam in enumerate(sp1.eigenvalues, start=1):
            assert abs(lam - (n - 0.5) ** 2) <= 1e-10
        assert sp0.complete and sp1.complete

    def test_residual_bounds(self, q_zero):
        ev = make_evaluator(q_zero)
        for j in (0, 1):
            sp = find_spectrum(ev, j, 10)
            for lam, res in zip(sp.eigenvalues, sp.residuals):
                assert res <= residual_bound(j, lam)

    def test_fixture_twenty_distinct_certified(self, q_alpha1):
        ev = make_evaluator(q_alpha1)
        sp = find_spectrum(ev, 0, 20)
        assert len(sp.eigenvalues) == 20
        assert all(sp.certified)
        assert sp.sweep_count == 20
        lams = np.array(sp.eigenvalues)
        d = np.abs(lams[:, None] - lams[None, :]) + np.eye(20)
        assert d.min() > 1e-6

    def test_fixture_alpha_invariance(self, family_default, q_alpha0):
        ev0 = make_evaluator(q_alpha0)
        ev2 = make_evaluator(build_potential(family_default, 2))
        for j in (0, 1):
            s0 = find_spectrum(ev0, j, 10)
            s2 = find_spectrum(ev2, j, 10)
            assert len(s0.eigenvalues) == len(s2.eigenvalues)
            for a, b in zip(s0.eigenvalues, s2.eigenvalues):
                assert abs(a - b) <= 1e-7

    def test_records(self, q_zero):
        ev = make_evaluator(q_zero)
        sp = find_spectrum(ev, 0, 3)
        recs = sp.to_records()
        assert [r["n"] for r in recs] == [1, 2, 3]
        assert all(r["certified"] for r in recs)
        assert sp.lambda_zero_value is None     # delta_0(0) = pi != 0
