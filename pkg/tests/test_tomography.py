"""Density-matrix assembly and metric tests against the published state.

The reference element set (p10 = 4.4e-4, p01 = 5.0e-4, p11 = 5.9e-8,
d = +/-3e-4, each with its quoted error) exercises every metric; expected
numbers are frozen from direct arithmetic on those inputs.
"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlink import tomography
from qlink.tomography import EfficiencyChain, PhysicalityError
from qlink.values import ValueWithError as V


P10 = V(4.4e-4, 0.1e-4)
P01 = V(5.0e-4, 0.1e-4)
P11 = V(5.9e-8, 0.1e-8)
D_I1 = V(3.0e-4, 0.1e-4)
D_I2 = V(-2.9e-4, 0.1e-4)

CHAIN = EfficiencyChain(eta_det=0.71, eta_setup=0.10,
                        eta_read_A=0.0625, eta_read_B=0.0865)


def reference_state(d=D_I1, label="i1"):
    return tomography.assemble(P10, P01, P11, d, label)


class TestAssemble:
    def test_complement_population(self):
        rho = reference_state()
        assert rho.p00.value == pytest.approx(0.999059941, abs=1e-9)
        assert rho.p00.stderr == pytest.approx(math.hypot(1e-5, 1e-5), rel=1e-6)

    def test_vacuum_state(self):
        rho = tomography.assemble(V(0), V(0), V(0), V(0))
        assert rho.p00.value == 1.0

    def test_negative_coherence_state_valid(self):
        rho = reference_state(D_I2, "i2")
        assert rho.d.value < 0
        assert rho.herald_label == "i2"

    def test_oversized_populations_rejected(self):
        with pytest.raises(PhysicalityError):
            tomography.assemble(V(0.6), V(0.6), V(0.0), V(0.0))

    def test_unphysical_coherence_rejected(self):
        with pytest.raises(PhysicalityError):
            tomography.assemble(P10, P01, P11, V(5.0e-3, 1e-6))

    def test_marginal_coherence_flagged_not_rejected(self):
        bound = math.sqrt(P10.value * P01.value)
        rho = tomography.assemble(P10, P01, P11, V(bound * 1.01, 0.1e-4))
        assert rho.coherence_flagged

    def test_trace_exactly_one(self):
        rho = reference_state()
        assert rho.trace() == pytest.approx(1.0, abs=1e-15)


class TestConcurrence:
    def test_reference_value(self):
        res = tomography.concurrence(reference_state())
        assert res.concurrence.value == pytest.approx(1.14430e-4, abs=1e-6)
        assert res.concurrence.stderr == pytest.approx(2.04e-5, rel=0.05)

    def test_zero_coherence(self):
        rho = tomography.assemble(P10, P01, P11, V(0.0))
        res = tomography.concurrence(rho)
        assert res.concurrence.value == 0.0
        assert res.unclamped.value < 0.0

    def test_feed_forward_combined_scale(self):
        # combined dataset coherence 3.1e-4 with halved error
        rho = tomography.assemble(P10, P01, P11, V(3.04e-4, 0.05e-4))
        res = tomography.concurrence(rho)
        assert res.concurrence.value == pytest.approx(1.22e-4, abs=2e-6)
        assert res.significance() > 6.0

    @given(st.floats(1e-6, 4e-4))
    def test_sign_symmetry(self, d):
        plus = tomography.concurrence(tomography.assemble(P10, P01, P11, V(d)))
        minus = tomography.concurrence(tomography.assemble(P10, P01, P11, V(-d)))
        assert plus.concurrence.value == minus.concurrence.value

    def test_arm_swap_symmetry(self):
        a = tomography.concurrence(tomography.assemble(P10, P01, P11, D_I1))
        b = tomography.concurrence(tomography.assemble(P01, P10, P11, D_I1))
        assert a.concurrence.value == pytest.approx(b.concurrence.value, rel=1e-12)


class TestTwoPhotonSuppression:
    def test_reference_value(self):
        h2c = tomography.two_photon_suppression(reference_state())
        assert h2c.value == pytest.approx(0.26818181, rel=1e-6)
        assert h2c.stderr == pytest.approx(0.0093, rel=0.05)

    def test_poissonian_boundary(self):
        rho = tomography.assemble(V(1e-3), V(1e-3), V(1e-6), V(0.0))
        assert tomography.two_photon_suppression(rho).value == pytest.approx(1.0)

    def test_perfect_suppression(self):
        rho = tomography.assemble(P10, P01, V(0.0), V(0.0))
        assert tomography.two_photon_suppression(rho).value == 0.0

    def test_zero_denominator_rejected(self):
        rho = tomography.assemble(V(0.0), P01, V(0.0), V(0.0))
        with pytest.raises(ValueError):
            tomography.two_photon_suppression(rho)


class TestOffdiagFromVisibility:
    def test_positive_herald(self):
        d = tomography.offdiag_from_visibility(V(0.63, 0.03), P10, P01, +1)
        assert d.value == pytest.approx(2.961e-4, abs=5e-7)

    def test_negative_herald(self):
        d = tomography.offdiag_from_visibility(V(0.61, 0.03), P10, P01, -1)
        assert d.value == pytest.approx(-2.867e-4, abs=5e-7)

    def test_zero_visibility(self):
        d = tomography.offdiag_from_visibility(V(0.0), P10, P01)
        assert d.value == 0.0

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            tomography.offdiag_from_visibility(V(1.2), P10, P01)
        with pytest.raises(ValueError):
            tomography.offdiag_from_visibility(V(0.6), P10, P01, sign=2)


class TestP11Estimate:
    def test_three_term_sum(self):
        got = tomography.p11_estimate(V(3.9e-4), V(5.0e-5), V(4.4e-4), V(6.0e-5))
        expected = 3.9e-4 * 6.0e-5 + 5.0e-5 * 4.4e-4 + 5.0e-5 * 6.0e-5
        assert got.value == pytest.approx(expected, rel=1e-12)

    def test_symmetric_reduction(self):
        p_c, p_a = 4.1e-4, 5.5e-5
        got = tomography.p11_estimate(V(p_c), V(p_a), V(p_c), V(p_a))
        assert got.value == pytest.approx(2 * p_c * p_a + p_a**2, rel=1e-12)

    def test_noiseless_case(self):
        got = tomography.p11_estimate(V(4e-4), V(0.0), V(5e-4), V(0.0))
        assert got.value == 0.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            tomography.p11_estimate(V(4e-4), V(0.0), V(5e-4), V(0.0)).value
            tomography.p11_estimate(V(-1e-5), V(0.0), V(5e-4), V(0.0))


class TestP11FromG2:
    def test_reference_scale(self):
        assert tomography.p11_from_g2(4.7e-4, 17.0) == pytest.approx(
            4.8919031141868506e-08, rel=1e-12
        )

    def test_limits(self):
        assert tomography.p11_from_g2(4.7e-4, 1.0 + 1e-12) == pytest.approx(0.0, abs=1e-20)
        assert tomography.p11_from_g2(0.0, 17.0) == 0.0

    def test_g2_at_most_one_rejected(self):
        with pytest.raises(ValueError):
            tomography.p11_from_g2(4.7e-4, 1.0)

    @given(p10=st.floats(1e-6, 1e-2), g2=st.floats(1.01, 500.0))
    @settings(max_examples=100)
    def test_equals_three_term_model_under_symmetric_split(self, p10, g2):
        # the split consistent with the closed form: p_acc = 2 p10 / g2
        p_acc = 2.0 * p10 / g2
        if p_acc > p10:
            return
        p_c = p10 - p_acc
        three = tomography.p11_estimate(V(p_c), V(p_acc), V(p_c), V(p_acc))
        assert three.value == pytest.approx(
            tomography.p11_from_g2(p10, g2), rel=1e-9
        )


class TestEffectiveFidelity:
    def test_reference_value(self):
        f = tomography.effective_fidelity(reference_state())
        assert f.value == pytest.approx(0.81910, abs=5e-4)

    def test_perfect_state(self):
        rho = tomography.assemble(V(2e-4), V(2e-4), V(0.0), V(2e-4))
        assert tomography.effective_fidelity(rho).value == pytest.approx(1.0)

    def test_incoherent_mixture(self):
        rho = tomography.assemble(V(2e-4), V(3e-4), V(0.0), V(0.0))
        assert tomography.effective_fidelity(rho).value == pytest.approx(0.5)

    def test_empty_subspace_rejected(self):
        rho = tomography.assemble(V(0.0), V(0.0), V(0.0), V(0.0))
        with pytest.raises(ValueError):
            tomography.effective_fidelity(rho)

    @given(
        p10=st.floats(1e-6, 0.2), p01=st.floats(1e-6, 0.2),
        p11=st.floats(0.0, 0.01), frac=st.floats(0.0, 1.0),
    )
    @settings(max_examples=100)
    def test_bounded(self, p10, p01, p11, frac):
        d = frac * math.sqrt(p10 * p01)
        rho = tomography.assemble(V(p10), V(p01), V(p11), V(d))
        f = tomography.effective_fidelity(rho)
        assert 0.0 <= f.value <= 1.0 + 1e-12


class TestBackpropagate:
    def test_reference_value(self):
        back = tomography.backpropagate(reference_state(), CHAIN)
        res = tomography.concurrence(back)
        assert res.concurrence.value == pytest.approx(0.0308068, abs=2e-4)
        # entanglement persists inside the crystals by several sigma
        assert res.significance() > 5.0

    def test_unit_chain_is_identity(self):
        chain = EfficiencyChain(1.0, 1.0, 1.0, 1.0)
        rho = reference_state()
        back = tomography.backpropagate(rho, chain)
        for name in ("p00", "p10", "p01", "p11", "d"):
            assert getattr(back, name).value == pytest.approx(
                getattr(rho, name).value, rel=1e-12
            )

    def test_overcorrected_chain_rejected(self):
        chain = EfficiencyChain(0.01, 0.01, 0.01, 0.01)
        with pytest.raises(PhysicalityError):
            tomography.backpropagate(reference_state(), chain)


class TestSignificance:
    def test_values(self):
        assert tomography.significance(1.1e-4, 0.3e-4) == pytest.approx(3.667, abs=1e-3)
        assert tomography.significance(1.2e-4, 0.2e-4) == pytest.approx(6.0)
        assert tomography.significance(0.0, 1.0) == 0.0

    def test_zero_sigma_rejected(self):
        with pytest.raises(ValueError):
            tomography.significance(1.0, 0.0)
