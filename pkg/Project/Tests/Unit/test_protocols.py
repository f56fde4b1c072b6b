import unittest

import numpy as np
import pytest
from pydantic import ValidationError

from Project.Config import QuadratureConfig
from Project.Errors import NormalizationError, ParameterRangeError
from Project.Protocols.Protocols_module import (TELEPORT_CORRECTIONS, bell_decomposition,
                                                bob_marginal, correction_assignments,
                                                paired_probabilities, resource_state,
                                                run_rsp_bell, run_rsp_vn, run_teleport,
                                                stage_rsp_bell, stage_rsp_vn,
                                                teleport_average_fidelity,
                                                teleport_fidelity_closed,
                                                teleport_fidelity_numeric)
from Project.QCore.QCore_module import PAULI_X, SQRT_HALF, state_fidelity, tensor
from Project.Run import THETA_MAX, ZERO_ANCILLA, AncillaState, Scheme, TargetSpec


def _same_up_to_phase(u, v):
    return abs(abs(np.vdot(u, v)) - 1.0) < 1e-12


def test_resource_state():
    s = resource_state(np.pi / 6)
    assert s.labels == ("alice", "bob")
    assert np.allclose(s.amplitudes, [np.cos(np.pi / 6), 0, 0, np.sin(np.pi / 6)])


@pytest.mark.parametrize("theta", [-0.1, THETA_MAX + 1e-6, np.nan])
def test_resource_state_rejects_theta(theta):
    with pytest.raises(ParameterRangeError):
        resource_state(theta)


def test_ancilla_must_be_normalized():
    with pytest.raises(NormalizationError):
        AncillaState(1.0, 1.0)


class TestRspVn(unittest.TestCase):
    def test_both_outcomes_equally_likely(self):
        run = run_rsp_vn(0.3, 1.2)
        self.assertEqual(run.scheme, Scheme.RSP_VN)
        self.assertEqual(run.classical_bits, 1)
        for b in run.branches:
            self.assertAlmostEqual(b.probability, 0.5, places=12)

    def test_pre_correction_states(self):
        theta, phi = 0.3, 1.2
        run = run_rsp_vn(theta, phi)
        c, s = np.cos(theta), np.sin(theta)
        plus = [c, np.exp(1j * phi) * s]
        minus = [c, -np.exp(1j * phi) * s]
        self.assertTrue(_same_up_to_phase(run.branch("+1").bob_pre_correction.amplitudes, plus))
        self.assertTrue(_same_up_to_phase(run.branch("-1").bob_pre_correction.amplitudes, minus))

    def test_deterministic_after_correction(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            theta, phi = rng.uniform(0, THETA_MAX), rng.uniform(0, 2 * np.pi)
            target = TargetSpec(theta, phi).state()
            for b in run_rsp_vn(theta, phi).branches:
                self.assertGreaterEqual(state_fidelity(target, b.bob_post_correction), 1 - 1e-10)

    def test_wrong_correction_is_detected(self):
        theta, phi = np.pi / 8, 0.3
        run = run_rsp_vn(theta, phi, correction=PAULI_X)
        f = state_fidelity(TargetSpec(theta, phi).state(), run.branch("-1").bob_post_correction)
        self.assertAlmostEqual(f, np.sin(2 * theta) ** 2 * np.sin(phi) ** 2, places=10)


class TestRspBell(unittest.TestCase):
    def test_zero_ancilla_never_gives_psi(self):
        run = run_rsp_bell(0.4, 2.0)
        self.assertAlmostEqual(run.branch("phi+").probability, 0.5, places=12)
        self.assertAlmostEqual(run.branch("phi-").probability, 0.5, places=12)
        for label in ("psi+", "psi-"):
            self.assertEqual(run.branch(label).probability, 0.0)
            self.assertIsNone(run.branch(label).bob_post_correction)

    def test_general_ancilla(self):
        ancilla = AncillaState(0.6, 0.8j)
        theta, phi = 0.5, 4.0
        run = run_rsp_bell(theta, phi, ancilla)
        self.assertAlmostEqual(run.total_probability, 1.0, places=12)
        target = TargetSpec(theta, phi).state()
        for b in run.branches:
            self.assertGreaterEqual(state_fidelity(target, b.bob_post_correction), 1 - 1e-10)
        pairs = paired_probabilities(run)
        self.assertAlmostEqual(pairs["+"], 0.5, places=12)
        self.assertAlmostEqual(pairs["-"], 0.5, places=12)
        self.assertAlmostEqual(run.branch("phi+").probability, 0.18, places=12)
        self.assertAlmostEqual(run.branch("psi+").probability, 0.32, places=12)

    def test_staging_labels(self):
        s = stage_rsp_bell(0.2, 0.1, ZERO_ANCILLA)
        self.assertEqual(s.labels, ("ancilla", "alice", "bob"))


def test_bob_marginal_does_not_depend_on_phase():
    theta = 0.35
    reference = bob_marginal(resource_state(theta)).matrix
    assert np.allclose(reference, np.diag([np.cos(theta) ** 2, np.sin(theta) ** 2]))
    for phi in (0.0, 1.0, 2.5):
        assert np.allclose(bob_marginal(stage_rsp_vn(theta, phi)).matrix, reference, atol=1e-12)
        assert np.allclose(bob_marginal(stage_rsp_bell(theta, phi, AncillaState(SQRT_HALF, SQRT_HALF))).matrix,
                           reference, atol=1e-12)


def test_bell_decomposition_of_teleport_input():
    theta = 0.3
    c, s = np.cos(theta), np.sin(theta)
    a, b = 0.6, 0.8j
    parts = bell_decomposition(tensor(AncillaState(a, b).state(), resource_state(theta)))
    h = SQRT_HALF
    assert np.allclose(parts["phi+"], [h * a * c, h * b * s])
    assert np.allclose(parts["phi-"], [h * a * c, -h * b * s])
    assert np.allclose(parts["psi+"], [h * b * c, h * a * s])
    assert np.allclose(parts["psi-"], [-h * b * c, h * a * s])


class TestTeleport(unittest.TestCase):
    def test_perfect_at_maximal_entanglement(self):
        eta = AncillaState.from_bloch(1.0, 2.0)
        run = run_teleport(THETA_MAX, eta)
        self.assertEqual(run.classical_bits, 2)
        for b in run.branches:
            self.assertAlmostEqual(b.probability, 0.25, places=12)
            self.assertGreaterEqual(state_fidelity(eta.state("bob"), b.bob_post_correction), 1 - 1e-10)

    def test_average_fidelity_of_plus_state(self):
        theta = np.pi / 8
        plus = AncillaState(SQRT_HALF, SQRT_HALF)
        self.assertAlmostEqual(teleport_average_fidelity(theta, plus), (1 + np.sin(2 * theta)) / 2, places=12)

    def test_basis_states_survive_any_theta(self):
        self.assertAlmostEqual(teleport_average_fidelity(0.2, ZERO_ANCILLA), 1.0, places=12)

    def test_correction_table_is_unique(self):
        coarse = QuadratureConfig(rings=4, sectors=6)
        perfect = [table for table in correction_assignments()
                   if teleport_fidelity_numeric(THETA_MAX, coarse, table) > 1 - 1e-9]
        self.assertEqual(len(perfect), 1)
        for label, u in TELEPORT_CORRECTIONS.items():
            self.assertTrue(np.allclose(perfect[0][label], u))


def test_fidelity_landmarks():
    assert teleport_fidelity_closed(THETA_MAX) == pytest.approx(1.0, abs=1e-15)
    assert teleport_fidelity_closed(0.0) == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert teleport_fidelity_closed(np.pi / 8) == pytest.approx(0.9023689270621825, abs=1e-9)


def test_closed_form_matches_cubic_expression():
    theta = 0.3
    c, s = np.cos(theta), np.sin(theta)
    assert teleport_fidelity_closed(theta) == pytest.approx(2 / 3 * (c ** 3 - s ** 3) / (c - s), abs=1e-14)


@pytest.mark.parametrize("theta", np.linspace(0.0, THETA_MAX, 7))
def test_quadrature_matches_closed_form(theta):
    assert abs(teleport_fidelity_numeric(theta) - teleport_fidelity_closed(theta)) <= 1e-6


def test_quadrature_config_validation():
    with pytest.raises(ValidationError):
        QuadratureConfig(rings=1)
    assert QuadratureConfig().nodes == 10_000
