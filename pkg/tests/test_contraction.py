"""Tensor-field transport along flows and asymptotic algebra contraction."""

import numpy as np
import pytest
import scipy.linalg

from geomstates import (
    ContractionMismatchError,
    LimitExistsError,
    LindbladModel,
    Poly,
    PolyTensorField,
    PolyVectorField,
    affine_flow_map,
    analyze_contraction,
    asymptotic_limit,
    build_basis,
    build_superoperator,
    contract_3level_decoherence,
    extract_contracted_products,
    flatten_field,
    flow_family,
    flow_tensor,
    format_product_table,
    lie_algebra_dimensions,
    lie_derivative,
    limit_set_algebra,
    lindblad_vf,
    matches_level_algebra,
    model_bloch_field,
    model_massive_decoherence,
    model_phase_damping,
    model_pure_decoherence,
    model_qubit_dissipation,
    model_three_level_decay,
    poisson_field,
    pushforward_affine,
    slot_label,
    symmetric_field,
    tensor_pairs,
    unflatten_field,
    verify_contracted_axioms,
)
from conftest import random_hermitian

SQ3 = np.sqrt(3.0)


def _tensor_values(T, y):
    m = T.m
    return np.array([[T.component(j, k)(y) for k in range(m)] for j in range(m)])


class TestFlattening:
    @pytest.mark.parametrize("m,symmetry,p", [(3, "antisymmetric", 3), (3, "symmetric", 6), (8, "antisymmetric", 28), (8, "symmetric", 36)])
    def test_pair_counts(self, m, symmetry, p):
        assert len(tensor_pairs(m, symmetry)) == p

    @pytest.mark.parametrize("n", [2, 3])
    def test_round_trip(self, n):
        basis = build_basis(n)
        for T, sym in (
            (poisson_field(basis), "antisymmetric"),
            (symmetric_field(basis), "symmetric"),
        ):
            vec = flatten_field(T)
            back = unflatten_field(vec, T.m, sym)
            assert T.allclose(back, 0.0)

    def test_slot_labels(self):
        assert slot_label(3, 0, "antisymmetric") == "T[1,2]:1"
        assert slot_label(3, 5, "symmetric") == "T[1,1]:x1*x2"
        assert slot_label(3, 1, "antisymmetric", names=["a", "b", "c"]) == "T[1,2]:a"

    def test_rejects_unknown_symmetry(self):
        with pytest.raises(ValueError):
            tensor_pairs(3, "antisym")


class TestLieDerivative:
    @pytest.mark.parametrize("n", [2, 3])
    def test_matches_superoperator_route(self, n, rng):
        basis = build_basis(n)
        A = rng.normal(size=(basis.m, basis.m))
        b = rng.normal(size=basis.m)
        Z = PolyVectorField.from_affine(A, b)
        for T, sym in (
            (poisson_field(basis), "antisymmetric"),
            (symmetric_field(basis), "symmetric"),
        ):
            M = build_superoperator(Z, sym).matrix
            direct = flatten_field(lie_derivative(Z, T))
            assert np.abs(direct - M @ flatten_field(T)).max() < 1e-12

    def test_phase_damping_poisson_form(self, basis2):
        """L_Z Lambda = 4 gamma x3 d1^d2 for dephasing at rate gamma."""
        Z = lindblad_vf(model_phase_damping(1.0))
        LT = lie_derivative(Z, poisson_field(basis2))
        want = np.zeros(3)
        want[2] = 4.0
        assert np.array_equal(LT.component(0, 1).c1, want)
        assert LT.component(0, 1).c0 == 0.0
        assert LT.component(0, 1).max_abs_quadratic() == 0.0
        assert LT.component(1, 2).is_zero(0.0)
        assert LT.component(2, 0).is_zero(0.0)

    def test_phase_damping_symmetric_form(self, basis2):
        """L_Z R = 4 gamma (d1 x d1 + d2 x d2) for dephasing at rate gamma."""
        Z = lindblad_vf(model_phase_damping(1.0))
        LR = lie_derivative(Z, symmetric_field(basis2))
        assert LR.component(0, 0).c0 == 4.0
        assert LR.component(1, 1).c0 == 4.0
        assert np.abs(LR.component(0, 0).c1).max() == 0.0
        assert LR.component(2, 2).is_zero(0.0)
        assert LR.component(0, 1).is_zero(0.0)
        assert LR.component(0, 2).is_zero(0.0)

    def test_gamma_scales_linearly(self, basis2):
        L1 = lie_derivative(lindblad_vf(model_phase_damping(1.0)), poisson_field(basis2))
        L3 = lie_derivative(lindblad_vf(model_phase_damping(3.0)), poisson_field(basis2))
        assert L3.allclose(L1.scale(3.0), 1e-12)

    def test_quadratic_field_rejected_by_superoperator(self, basis2):
        from geomstates import InvariantViolationError, model_gisin

        Z = model_gisin(basis2, basis2.traceless_observable([0.0, 0.0, 1.0]))
        with pytest.raises(InvariantViolationError):
            build_superoperator(Z, "antisymmetric")


class TestFlowFamily:
    def test_semigroup_property(self, basis2, rng):
        Z = lindblad_vf(model_qubit_dissipation(0.7))
        fam = flow_family(Z, poisson_field(basis2))
        M = fam.superop.matrix
        for _ in range(3):
            s, t = rng.uniform(0.0, 5.0, size=2)
            lhs = fam.flat_at(s + t)
            rhs = scipy.linalg.expm(-s * M) @ fam.flat_at(t)
            assert np.abs(lhs - rhs).max() < 1e-9

    def test_t_zero_is_initial(self, basis2):
        Z = lindblad_vf(model_phase_damping(1.0))
        fam = flow_family(Z, symmetric_field(basis2))
        assert np.array_equal(fam.flat_at(0.0), fam.flat0)
        assert fam.tensor_at(0.0).allclose(symmetric_field(basis2), 0.0)

    def test_dissipation_poisson_closed_form(self, basis2):
        """Lambda_t = x3 d1^d2 + e^{-2t}(x1 d2^d3 + x2 d3^d1)."""
        Z = lindblad_vf(model_qubit_dissipation(1.0))
        for t in (0.0, 0.25, 1.0, 4.0):
            Tt = flow_tensor(Z, poisson_field(basis2), t)
            e = np.exp(-2.0 * t)
            assert abs(Tt.component(0, 1).c1[2] - 1.0) < 1e-9
            assert abs(Tt.component(1, 2).c1[0] - e) < 1e-9
            assert abs(Tt.component(2, 0).c1[1] - e) < 1e-9
            # nothing else appears
            off = [
                Tt.component(0, 1).c1[0], Tt.component(0, 1).c1[1],
                Tt.component(1, 2).c1[1], Tt.component(1, 2).c1[2],
                Tt.component(2, 0).c1[0], Tt.component(2, 0).c1[2],
            ]
            assert np.abs(off).max() < 1e-9
            for j in range(3):
                for k in range(3):
                    assert Tt.component(j, k).c0 == pytest.approx(0.0, abs=1e-9)
                    assert Tt.component(j, k).max_abs_quadratic() < 1e-9

    def test_dissipation_symmetric_closed_form(self, basis2):
        """R_t = e^{-2t}(d1 d1 + d2 d2) + e^{-4t} d3 d3 - x x."""
        Z = lindblad_vf(model_qubit_dissipation(1.0))
        for t in (0.0, 0.25, 1.0, 4.0):
            Tt = flow_tensor(Z, symmetric_field(basis2), t)
            e2, e4 = np.exp(-2.0 * t), np.exp(-4.0 * t)
            assert abs(Tt.component(0, 0).c0 - e2) < 1e-9
            assert abs(Tt.component(1, 1).c0 - e2) < 1e-9
            assert abs(Tt.component(2, 2).c0 - e4) < 1e-9
            for j in range(3):
                for k in range(3):
                    c2 = Tt.component(j, k).c2
                    want = np.zeros((3, 3))
                    want[j, k] -= 0.5
                    want[k, j] -= 0.5
                    assert np.abs(c2 - want).max() < 1e-9
                    assert np.abs(Tt.component(j, k).c1).max() < 1e-9

    def test_phase_damping_poisson_closed_form(self, basis2):
        """Dephasing leaves x1 d2^d3 + x2 d3^d1 fixed and damps x3 d1^d2
        at rate 4 gamma."""
        Z = lindblad_vf(model_phase_damping(1.0))
        for t in (0.3, 2.0):
            Tt = flow_tensor(Z, poisson_field(basis2), t)
            assert abs(Tt.component(0, 1).c1[2] - np.exp(-4.0 * t)) < 1e-9
            assert abs(Tt.component(1, 2).c1[0] - 1.0) < 1e-9
            assert abs(Tt.component(2, 0).c1[1] - 1.0) < 1e-9

    def test_pushforward_oracle(self, basis2, rng):
        Z = lindblad_vf(model_qubit_dissipation(1.0))
        for T in (poisson_field(basis2), symmetric_field(basis2)):
            for t in (0.2, 1.3):
                Tt = flow_tensor(Z, T, t)
                for _ in range(5):
                    y = rng.normal(size=3) * 0.4
                    assert (
                        np.abs(_tensor_values(Tt, y) - pushforward_affine(Z, T, t, y)).max()
                        < 1e-12
                    )

    def test_rk4_oracle_on_coefficients(self, basis3):
        """Flowed coefficients match a brute-force RK4 integration of the
        coefficient-space transport equation."""
        Z = lindblad_vf(model_three_level_decay())
        fam = flow_family(Z, poisson_field(basis3))
        M = fam.superop.matrix
        v = fam.flat0.copy()
        t_end, dt = 0.5, 1e-4
        steps = int(round(t_end / dt))
        for _ in range(steps):
            k1 = -M @ v
            k2 = -M @ (v + 0.5 * dt * k1)
            k3 = -M @ (v + 0.5 * dt * k2)
            k4 = -M @ (v + dt * k3)
            v = v + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        assert np.abs(v - fam.flat_at(t_end)).max() < 1e-6

    def test_finite_time_conjugation(self, basis2, rng):
        """e^{-tL} acts by the affine change of coordinates of the flow:
        E^{-1} Lambda_t(E x + f) E^{-T} = Lambda_0(x)."""
        for model in (model_qubit_dissipation(1.0), model_phase_damping(0.5)):
            Z = lindblad_vf(model)
            A, b = Z.linear_parts()
            T0 = poisson_field(basis2)
            for t in (0.1, 1.0, 5.0):
                E, f = affine_flow_map(A, b, t)
                Ei = np.linalg.inv(E)
                Tt = flow_tensor(Z, T0, t)
                for _ in range(3):
                    x = rng.normal(size=3) * 0.3
                    lhs = Ei @ _tensor_values(Tt, E @ x + f) @ Ei.T
                    assert np.abs(lhs - _tensor_values(T0, x)).max() < 1e-8


class TestFrozenDecayPins:
    """Transported tensors of the spontaneous-decay model, pinned at
    t = 0.5 against independently integrated reference values."""

    Y = np.array([0.1, -0.2, 0.15, 0.05, -0.1, 0.2, -0.05, 0.1])

    def test_poisson_pins(self, basis3):
        Z = lindblad_vf(model_three_level_decay())
        Tt = flow_tensor(Z, poisson_field(basis3), 0.5)
        assert Tt.component(0, 1)(self.Y) == pytest.approx(
            -0.16984920374886525, abs=1e-12
        )
        assert Tt.component(1, 2)(self.Y) == pytest.approx(
            -0.5396984074977305, abs=1e-12
        )

    def test_jordan_pins(self, basis3):
        Z = lindblad_vf(model_three_level_decay())
        Tt = flow_tensor(Z, symmetric_field(basis3), 0.5)
        y = self.Y
        assert Tt.component(0, 0)(y) + y[0] * y[0] == pytest.approx(
            0.0961623485964112, abs=1e-12
        )
        assert Tt.component(2, 2)(y) + y[2] * y[2] == pytest.approx(
            -0.1523188510966219, abs=1e-12
        )
        assert Tt.component(0, 2)(y) + y[0] * y[2] == pytest.approx(
            0.16565413312868882, abs=1e-12
        )


class TestAsymptotics:
    def test_unitary_flow_leaves_tensors_invariant(self, basis2):
        Z = model_bloch_field(1.3)
        for T in (poisson_field(basis2), symmetric_field(basis2)):
            fam = flow_family(Z, T)
            an = asymptotic_limit(fam)
            assert an.verdict == "limit"
            assert np.abs(an.limit_flat - fam.flat0).max() < 1e-12

    def test_phase_damping_contraction(self, basis2):
        Z = lindblad_vf(model_phase_damping(1.0))
        rp = asymptotic_limit(flow_family(Z, poisson_field(basis2)))
        rj = asymptotic_limit(flow_family(Z, symmetric_field(basis2)))
        assert rp.verdict == "limit" and rj.verdict == "limit"
        tab = extract_contracted_products(rp.limit, rj.limit)
        assert tab.linear
        lines = set(format_product_table(tab))
        assert lines == {"{x1,x3} = -x2", "{x2,x3} = x1", "(x3,x3) = 1"}
        ax = verify_contracted_axioms(tab)
        assert ax.max_residual() < 1e-9
        assert lie_algebra_dimensions(tab.c_full) == (2, 0)

    def test_dissipation_contraction(self, basis2):
        Z = lindblad_vf(model_qubit_dissipation(1.0))
        rp = asymptotic_limit(flow_family(Z, poisson_field(basis2)))
        rj = asymptotic_limit(flow_family(Z, symmetric_field(basis2)))
        assert rp.verdict == "limit" and rj.verdict == "limit"
        tab = extract_contracted_products(rp.limit, rj.limit)
        assert tab.linear
        assert set(format_product_table(tab)) == {"{x1,x2} = x3"}
        assert verify_contracted_axioms(tab).max_residual() < 1e-9
        # one-dimensional derived algebra contained in the center
        assert lie_algebra_dimensions(tab.c_full) == (1, 1)

    def test_decay_divergent_modes(self, basis3):
        Z = lindblad_vf(model_three_level_decay())
        an = asymptotic_limit(flow_family(Z, poisson_field(basis3)))
        assert an.verdict == "divergent"
        assert an.limit is None
        rates = sorted({round(m.growth_rate, 9) for m in an.modes})
        assert rates == [3.0]
        assert all(not m.polynomial_growth for m in an.modes)
        for mode in an.modes:
            assert "T[1,2]" in mode.component or "T[2,3]" in mode.component

    def test_decay_mode_direction_profile(self, basis3):
        """The diverging coefficient is proportional to 1 - sqrt(3) x8 in
        every unstable component."""
        Z = lindblad_vf(model_three_level_decay())
        an = asymptotic_limit(flow_family(Z, poisson_field(basis3)))
        pairs = tensor_pairs(8, "antisymmetric")
        q = 1 + 8 + 8 * 9 // 2  # coefficient slots per component
        unstable = {pairs.index((0, 1)), pairs.index((1, 2))}
        for mode in an.modes:
            blocks = mode.direction.reshape(len(pairs), q)
            for a, blk in enumerate(blocks):
                if np.abs(blk).max() < 1e-9:
                    continue
                assert a in unstable
                # only the constant slot and the x8 slot carry weight,
                # in the ratio of the profile 1 - sqrt(3) x8
                assert abs(blk[8] / blk[0] + SQ3) < 1e-9
                rest = np.ones(q, dtype=bool)
                rest[[0, 8]] = False
                assert np.abs(blk[rest]).max() < 1e-9

    def test_symmetric_sector_also_divergent(self, basis3):
        Z = lindblad_vf(model_three_level_decay())
        an = asymptotic_limit(flow_family(Z, symmetric_field(basis3)))
        assert an.verdict == "divergent"
        assert sorted({round(m.growth_rate, 9) for m in an.modes}) == [3.0]

    def test_oscillatory_verdict(self):
        A = np.array([[0.0, 0, 0], [0, 0, 2], [0, -2, 0]])
        Z = PolyVectorField.from_affine(A, np.zeros(3))
        x2 = Poly(3, c1=np.array([0.0, 1.0, 0.0]))
        zero = Poly(3)
        T = PolyTensorField(
            [
                [zero, zero, zero],
                [zero, zero, x2],
                [zero, x2.scale(-1.0), zero],
            ],
            symmetry="antisymmetric",
        )
        an = asymptotic_limit(flow_family(Z, T))
        assert an.verdict == "oscillatory"
        assert all(m.oscillatory and not m.polynomial_growth for m in an.modes)

    def test_defective_zero_polynomial_growth(self, basis2):
        A = np.array([[0.0, 1, 0], [0, 0, 0], [0, 0, 0]])
        Z = PolyVectorField.from_affine(A, np.zeros(3))
        an = asymptotic_limit(flow_family(Z, poisson_field(basis2)))
        assert an.verdict == "divergent"
        assert an.defect > 0.5
        assert any(m.polynomial_growth for m in an.modes)
        assert all(abs(m.eigenvalue) < 1e-10 for m in an.modes if m.polynomial_growth)

    def test_random_affine_models_contract_to_algebras(self, rng):
        """Generic two-level Markov generators yield limits whose product
        tables satisfy the Lie-Jordan axioms."""
        basis = build_basis(2)
        worst = 0.0
        n_limits = 0
        for i in range(20):
            H = random_hermitian(rng, 2, traceless=True)
            Vs = []
            for _ in range(2):
                V = 0.6 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
                Vs.append(V - (np.trace(V) / 2.0) * np.eye(2))
            Z = lindblad_vf(LindbladModel(basis, H=H, V=Vs))
            rp = asymptotic_limit(flow_family(Z, poisson_field(basis)))
            rj = asymptotic_limit(flow_family(Z, symmetric_field(basis)))
            if rp.verdict != "limit" or rj.verdict != "limit":
                continue
            n_limits += 1
            tab = extract_contracted_products(rp.limit, rj.limit)
            if tab.linear:
                worst = max(
                    worst, verify_contracted_axioms(tab, trials=30, seed=i).max_residual()
                )
        assert n_limits >= 15  # generic dissipative models do settle
        assert worst < 1e-9


class TestLimitSetAlgebra:
    def test_decay_limit_set(self, basis3):
        Z = lindblad_vf(model_three_level_decay())
        lsa = limit_set_algebra(Z, basis3, verdict="divergent")
        assert lsa.free_indices == [0, 1, 2]
        assert lsa.closed
        want = np.zeros(8)
        want[7] = 1.0 / SQ3
        assert np.abs(lsa.point - want).max() < 1e-9
        assert matches_level_algebra(lsa, 2)
        assert not matches_level_algebra(lsa, 3)

    def test_guard_when_limit_exists(self, basis2):
        Z = lindblad_vf(model_phase_damping(1.0))
        with pytest.raises(LimitExistsError):
            limit_set_algebra(Z, basis2, verdict="limit")


class TestFullAnalysis:
    def test_phase_damping_report(self, basis2):
        Z = lindblad_vf(model_phase_damping(1.0))
        rep = analyze_contraction(Z, basis2)
        assert rep.verdict == "limit"
        assert rep.tables is not None and rep.tables.linear
        assert rep.axioms.max_residual() < 1e-9
        assert rep.divergent_modes() == []
        assert rep.stationary.kind == "affine-set"

    def test_decay_report(self, basis3):
        Z = lindblad_vf(model_three_level_decay())
        rep = analyze_contraction(Z, basis3)
        assert rep.verdict == "divergent"
        assert rep.tables is None
        assert rep.limit_set is not None and rep.limit_set.closed
        assert len(rep.divergent_modes()) > 0

    def test_parallel_and_serial_agree(self, basis2):
        Z = lindblad_vf(model_qubit_dissipation(1.0))
        r1 = analyze_contraction(Z, basis2, parallel=True)
        r2 = analyze_contraction(Z, basis2, parallel=False)
        assert r1.verdict == r2.verdict
        assert np.abs(
            r1.poisson.limit_flat - r2.poisson.limit_flat
        ).max() == 0.0

    def test_decoherence_cross_check(self):
        rm, rp = contract_3level_decoherence()
        assert rm.verdict == "limit" and rp.verdict == "limit"
        lines_m = set(format_product_table(rm.tables))
        lines_p = set(format_product_table(rp.tables))
        assert lines_m == lines_p
        # brackets of coherences with the diagonal torus survive ...
        assert {"{x1,x3} = -x2", "{x2,x3} = x1"} <= lines_m
        # ... while coherence-coherence brackets die out
        assert not any(ln.startswith("{x1,x2}") for ln in lines_m)
        assert rm.axioms.max_residual() < 1e-9
        assert lie_algebra_dimensions(rm.tables.c_full) == (6, 0)

    def test_decoherence_mismatch_guard(self, monkeypatch):
        import geomstates.dynamics as dyn

        def crooked(d, gammas):
            return lindblad_vf(model_three_level_decay())

        monkeypatch.setattr(dyn, "model_pure_decoherence", crooked)
        with pytest.raises(ContractionMismatchError):
            contract_3level_decoherence()
