"""Integral-operator discretization and eigenpair machinery."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isobispec.errors import ZeroOperator
from isobispec.grid import PI, Grid, PiecewiseFn, inner_l2, norm_l2
from isobispec.integral_op import (apply_M, build_nystrom, eig_report,
                                   leading_real_eigenpair, normalize_family)

# regression baselines, reference fixture (a = 0.35 pi, h == 1):
# refined eigenvalue on the 2080-panel working grid, Nystrom n = 256,
# and the coarse Nystrom eigenvalue itself
ETA_REFINED_2080 = 0.04386003956451916
ETA_COARSE_256 = 0.04386060584351052


def const_h(grid, c=1.0):
    return PiecewiseFn.constant(grid, grid.idx_5a2, grid.n_panels, c)


class TestApplyM:
    def test_zero_h_gives_zero(self, grid_small):
        g = grid_small
        h = PiecewiseFn.zeros(g, g.idx_5a2, g.n_panels)
        f = PiecewiseFn.from_callable(g, g.idx_3a2, g.idx_pi_a, np.cos)
        assert norm_l2(apply_M(h, f)) == 0.0

    def test_zero_f_gives_zero(self, grid_small):
        g = grid_small
        f = PiecewiseFn.zeros(g, g.idx_3a2, g.idx_pi_a)
        assert norm_l2(apply_M(const_h(g), f)) == 0.0

    def test_closed_form_oracle(self, grid_default):
        # h == 1, f == 1: the kernel integral collapses to
        # g(x) = ((pi - x - a)^2) / 2  (hand integration)
        g = grid_default
        f = PiecewiseFn.constant(g, g.idx_3a2, g.idx_pi_a, 1.0)
        out = apply_M(const_h(g), f)
        rng = np.random.default_rng(11)
        for i in rng.choice(np.arange(g.idx_3a2, g.idx_pi_a + 1), 10, False):
            x = g.x(int(i))
            assert abs(out.eval(x) - (PI - x - g.a) ** 2 / 2) < 1e-9

    @settings(max_examples=20, deadline=None)
    @given(c=st.floats(-5, 5).filter(lambda v: abs(v) > 1e-3))
    def test_linearity_in_h_and_f(self, c):
        g = Grid(Fraction(7, 20), 160)
        h = const_h(g)
        f = PiecewiseFn.from_callable(g, g.idx_3a2, g.idx_pi_a,
                                      lambda x: np.sin(3 * x))
        base = apply_M(h, f)
        scaled_h = apply_M(h * c, f)
        scaled_f = apply_M(h, f * c)
        ref = norm_l2(base) * abs(c)
        assert norm_l2(scaled_h - base * c) <= 1e-12 * (1 + ref)
        assert norm_l2(scaled_f - base * c) <= 1e-12 * (1 + ref)

    def test_self_adjointness(self, grid_default):
        g = grid_default
        h = const_h(g)
        rng = np.random.default_rng(5)
        for _ in range(3):
            c = rng.normal(size=4)
            f = PiecewiseFn.from_callable(
                g, g.idx_3a2, g.idx_pi_a,
                lambda x: c[0] * np.sin(x) + c[1] * np.cos(2 * x))
            w = PiecewiseFn.from_callable(
                g, g.idx_3a2, g.idx_pi_a,
                lambda x: c[2] + c[3] * x)
            lhs = inner_l2(apply_M(h, f), w)
            rhs = inner_l2(f, apply_M(h, w))
            assert abs(lhs - rhs) < 1e-8 * (1 + abs(lhs))


class TestNystrom:
    def test_symmetry_defect(self, grid_default):
        op = build_nystrom(const_h(grid_default), 256)
        assert op.symmetry_defect() <= 1e-12

    def test_matches_apply_M_on_ones(self, grid_default):
        # non-constant seed so the trapezoid truncation is visible; the
        # piecewise-linear evaluation of the reference adds an n-independent
        # floor around 3e-7 at this grid
        g = grid_default
        h = PiecewiseFn.from_callable(g, g.idx_5a2, g.n_panels, np.sin)
        f = PiecewiseFn.constant(g, g.idx_3a2, g.idx_pi_a, 1.0)
        ref = apply_M(h, f)
        errs = []
        for n in (64, 256):
            op = build_nystrom(h, n)
            vals = op.matrix @ np.ones(n + 1)
            errs.append(np.abs(vals - np.asarray(ref.eval(op.nodes))).max())
        assert errs[-1] <= 1e-6
        assert errs[-1] < errs[0] / 3

    def test_zero_matrix(self, grid_small):
        g = grid_small
        h = PiecewiseFn.zeros(g, g.idx_5a2, g.n_panels)
        op = build_nystrom(h, 16)
        assert np.abs(op.matrix).max() == 0.0
        with pytest.raises(ZeroOperator):
            leading_real_eigenpair(op)

    def test_small_n_rejected(self, grid_small):
        with pytest.raises(ValueError):
            build_nystrom(const_h(grid_small), 4)


class TestEigenpair:
    def test_fixture_eigenpair(self, grid_default):
        op = build_nystrom(const_h(grid_default), 256)
        pair = leading_real_eigenpair(op)
        assert pair.residual <= 1e-8
        assert pair.eta != 0
        assert abs(pair.eta - ETA_REFINED_2080) <= 1e-6 * abs(ETA_REFINED_2080)
        assert abs(pair.coarse_eta - ETA_COARSE_256) <= 1e-9
        assert norm_l2(pair.e) == pytest.approx(1.0, abs=1e-12)
        assert pair.e.integrate() > 0

    def test_independent_dense_oracle(self, grid_default):
        # test-local trapezoid collocation + eigh, no library machinery
        g = grid_default
        a = g.a
        for n in (64, 256):
            lo, hi = 1.5 * a, PI - a
            nodes = np.linspace(lo, hi, n + 1)
            w = np.full(n + 1, (hi - lo) / n)
            w[0] = w[-1] = (hi - lo) / (2 * n)
            arg = nodes[:, None] + nodes[None, :] - a / 2
            kappa = np.clip(PI - arg, 0.0, None)     # K_{h==1}(u) = (pi-u)+
            S = np.sqrt(w)[:, None] * kappa * np.sqrt(w)[None, :]
            evals = np.linalg.eigvalsh(S)
            eta_oracle = evals[np.argmax(np.abs(evals))]
            op = build_nystrom(const_h(g), n)
            pair = leading_real_eigenpair(op, refine=False)
            # same discretization up to the cutoff halving on a zero entry
            assert abs(pair.coarse_eta - eta_oracle) <= 1e-12

    def test_eta_convergence_order(self, grid_default):
        h = const_h(grid_default)
        etas = [leading_real_eigenpair(build_nystrom(h, n), refine=False).coarse_eta
                for n in (64, 128, 256)]
        order = math.log2(abs((etas[0] - etas[1]) / (etas[1] - etas[2])))
        assert order >= 1.8

    def test_eigenvector_grid_refinement(self, family_mid, family_default):
        e1 = family_mid.e
        e2 = family_default.e
        xs = e1.grid.x_nodes(e1.i_lo, e1.i_hi)
        v1 = e1.flat_values()
        v2 = np.asarray(e2.eval(xs))
        if np.dot(v1, v2) < 0:
            v2 = -v2
        num = np.sqrt(np.trapezoid((v1 - v2) ** 2, xs))
        assert num <= 1e-4

    def test_which_selection(self, grid_default):
        op = build_nystrom(const_h(grid_default), 64)
        largest = leading_real_eigenpair(op, which="largest", refine=False)
        second = leading_real_eigenpair(op, which=1, refine=False)
        assert abs(second.coarse_eta) < abs(largest.coarse_eta)


class TestNormalizeFamily:
    def test_targets(self, grid_default):
        h = const_h(grid_default)
        pair = leading_real_eigenpair(build_nystrom(h, 256))
        for target in (+1, -1):
            h2, e = normalize_family(h, pair, target)
            resid = norm_l2(apply_M(h2, e) - e * float(target))
            assert resid <= 1e-7

    def test_idempotence(self, grid_default):
        # rescaling an already-normalized family is the identity
        h = const_h(grid_default)
        pair = leading_real_eigenpair(build_nystrom(h, 256))
        h1, e = normalize_family(h, pair, +1)
        op2 = build_nystrom(h1, 256)
        pair2 = leading_real_eigenpair(op2)
        h2, _ = normalize_family(h1, pair2, +1)
        diff = max(np.abs(a - b).max()
                   for a, b in zip(h1.seg_values, h2.seg_values))
        assert diff <= 1e-12 * np.abs(h1.flat_values()).max()

    def test_bad_target(self, grid_default):
        h = const_h(grid_default)
        pair = leading_real_eigenpair(build_nystrom(h, 64))
        with pytest.raises(ValueError):
            normalize_family(h, pair, 2)


def test_eig_report_roundtrip(grid_small):
    import json

    h = const_h(grid_small)
    op = build_nystrom(h, 16)
    pair = leading_real_eigenpair(op)
    rep = eig_report(op, pair)
    out = json.loads(json.dumps(rep))
    assert out["n"] == 16
    assert len(out["nodes"]) == 17
    assert len(out["kernel_matrix"]) == 17
    assert out["residual"] <= 1e-8
