import unittest

import numpy as np
import pytest

from Project.Correlators.Correlators_module import (SIGMA_Z, canonical_settings, chsh_rsp_bell,
                                                    chsh_rsp_vn, chsh_state, chsh_teleport,
                                                    correlator_kernel, decode_settings, evaluate,
                                                    evaluate_direct, i3322_rsp_bell,
                                                    i3322_rsp_vn, i3322_teleport,
                                                    joint_prob_minus_minus, observable_A1,
                                                    observable_A2, teleport_input)
from Project.Errors import DimensionError, NotBivalentError, ParameterRangeError
from Project.Protocols.Protocols_module import stage_rsp_vn
from Project.QCore.QCore_module import (SQRT_HALF, bell_states, bloch_direction, expectation,
                                        pauli_direction, tensor)
from Project.Run import THETA_MAX, ZERO_ANCILLA, AncillaState
from Project.Scenario import Scenario, ScenarioKind
from Project.States import Observable

ROOT3 = np.sqrt(3)

N_PLUS = np.array([SQRT_HALF, SQRT_HALF, 0.0])
N_MINUS = np.array([SQRT_HALF, -SQRT_HALF, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])

# phases and directions reaching 5 in the joint I3322 terms of the von Neumann scheme
I3322_PHASES = (np.pi / 6, -np.pi / 6, np.pi / 2)
I3322_DIRECTIONS = (np.array([ROOT3 / 2, 0.5, 0.0]),
                    np.array([ROOT3 / 2, -0.5, 0.0]),
                    np.array([0.0, 1.0, 0.0]))


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def _random_direction(rng):
    return bloch_direction(np.arccos(rng.uniform(-1, 1)), rng.uniform(0, 2 * np.pi))


def _random_eta(rng):
    return AncillaState.from_bloch(np.arccos(rng.uniform(-1, 1)), rng.uniform(0, 2 * np.pi))


class TestAliceObservables(unittest.TestCase):
    def test_square_to_identity(self):
        for m in (observable_A1(), observable_A2()):
            self.assertTrue(m.is_bivalent())
            self.assertEqual(m.dim, 4)

    def test_bell_eigenvalues(self):
        bell = bell_states()
        expected_a1 = {"phi+": -1, "phi-": 1, "psi+": -1, "psi-": 1}
        expected_a2 = {"phi+": 1, "phi-": -1, "psi+": -1, "psi-": 1}
        for label, s in bell.items():
            self.assertAlmostEqual(expectation(observable_A1(), ["ancilla", "alice"], s), expected_a1[label])
            self.assertAlmostEqual(expectation(observable_A2(), ["ancilla", "alice"], s), expected_a2[label])

    def test_a1_unbiased_on_product_with_zero(self):
        s = tensor(AncillaState(0.6, 0.8j).state("ancilla"), ZERO_ANCILLA.state("alice"))
        self.assertAlmostEqual(expectation(observable_A1(), ["ancilla", "alice"], s), 0.0, places=12)


def test_rsp_vn_reduces_to_planar_projection(rng):
    for _ in range(100):
        theta, phi = rng.uniform(0, THETA_MAX), rng.uniform(0, 2 * np.pi)
        n = _random_direction(rng)
        joint = np.kron(SIGMA_Z.matrix, pauli_direction(n).matrix)
        value = expectation(joint, ["alice", "bob"], stage_rsp_vn(theta, phi))
        assert value == pytest.approx(np.sin(2 * theta) * (n[0] * np.cos(phi) + n[1] * np.sin(phi)), abs=1e-12)


@pytest.mark.parametrize("theta", [0.0, 0.2, np.pi / 8, 0.6, THETA_MAX])
def test_rsp_vn_at_optimal_settings(theta):
    assert chsh_rsp_vn(theta, 0.0, np.pi / 2, N_PLUS, N_MINUS) == pytest.approx(
        2 * np.sqrt(2) * np.sin(2 * theta), abs=1e-12)


def test_classical_bound_reached_at_pi_over_8():
    assert chsh_rsp_vn(np.pi / 8, 0.0, np.pi / 2, N_PLUS, N_MINUS) == pytest.approx(2.0, abs=1e-9)
    assert chsh_rsp_bell(np.pi / 8, np.pi, np.pi / 2, N_PLUS, N_MINUS) == pytest.approx(2.0, abs=1e-9)


def test_rsp_vn_rotation_symmetry(rng):
    theta = 0.4
    for _ in range(20):
        phi1, phi2, c = rng.uniform(0, 2 * np.pi, size=3)
        n1, n2 = _random_direction(rng), _random_direction(rng)
        rotation = np.array([[np.cos(c), -np.sin(c), 0], [np.sin(c), np.cos(c), 0], [0, 0, 1]])
        shifted = chsh_rsp_vn(theta, phi1 + c, phi2 + c, rotation @ n1, rotation @ n2)
        assert shifted == pytest.approx(chsh_rsp_vn(theta, phi1, phi2, n1, n2), abs=1e-12)


def test_rsp_bell_depends_on_ancilla_population_imbalance():
    theta = np.pi / 8
    ancilla = AncillaState(0.6, 0.8)
    d = 0.6 ** 2 - 0.8 ** 2
    norm = np.sqrt(1 + d ** 2)
    n1, n2 = np.array([1.0, d, 0.0]) / norm, np.array([1.0, -d, 0.0]) / norm
    value = chsh_rsp_bell(theta, np.pi, np.pi / 2, n1, n2, ancilla=ancilla)
    assert value == pytest.approx(2 * np.sin(2 * theta) * norm, abs=1e-12)
    assert chsh_rsp_bell(theta, np.pi, np.pi / 2, n1, n2) < value + 1e-12


def test_teleport_at_optimal_settings():
    minus = AncillaState.from_bloch(np.pi / 2, np.pi)
    plus_i = AncillaState.from_bloch(np.pi / 2, np.pi / 2)
    for theta in (0.1, np.pi / 8, THETA_MAX):
        value = chsh_teleport(theta, minus, plus_i, N_PLUS, N_MINUS)
        assert value == pytest.approx(2 * np.sqrt(2) * np.sin(2 * theta), abs=1e-12)


def test_teleport_vanishes_without_entanglement(rng):
    for _ in range(20):
        value = chsh_teleport(0.0, _random_eta(rng), _random_eta(rng),
                              _random_direction(rng), _random_direction(rng))
        assert value == pytest.approx(0.0, abs=1e-12)


def test_teleport_ignores_global_phase_of_input(rng):
    eta1, eta2 = _random_eta(rng), _random_eta(rng)
    n1, n2 = _random_direction(rng), _random_direction(rng)
    phase = np.exp(0.7j)
    rotated = AncillaState(eta1.a * phase, eta1.b * phase)
    assert chsh_teleport(0.3, rotated, eta2, n1, n2) == pytest.approx(chsh_teleport(0.3, eta1, eta2, n1, n2),
                                                                      abs=1e-12)


def test_state_chsh_reaches_horodecki_value():
    theta = 0.3
    s = np.sin(2 * theta)
    norm = np.sqrt(1 + s ** 2)
    n1, n2 = np.array([s, 0.0, 1.0]) / norm, np.array([-s, 0.0, 1.0]) / norm
    value = chsh_state(theta, Z_AXIS, np.array([1.0, 0.0, 0.0]), n1, n2)
    assert value == pytest.approx(2 * norm, abs=1e-12)


def test_chsh_never_exceeds_tsirelson(rng):
    for _ in range(50):
        theta = rng.uniform(0, THETA_MAX)
        phi1, phi2 = rng.uniform(0, 2 * np.pi, size=2)
        n1, n2 = _random_direction(rng), _random_direction(rng)
        assert chsh_rsp_vn(theta, phi1, phi2, n1, n2) <= 2 * np.sqrt(2) + 1e-12
        assert chsh_rsp_bell(theta, phi1, phi2, n1, n2) <= 2 * np.sqrt(2) + 1e-12
        assert chsh_teleport(theta, _random_eta(rng), _random_eta(rng), n1, n2) <= 2 * np.sqrt(2) + 1e-12


class TestJointProbability(unittest.TestCase):
    def test_hand_computed_value(self):
        s = teleport_input(np.pi / 6, ZERO_ANCILLA)
        p = joint_prob_minus_minus(observable_A1(), ["ancilla", "alice"], SIGMA_Z, ["bob"], s)
        self.assertAlmostEqual(p, 0.125, places=12)

    def test_probabilities_in_unit_interval(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            s = teleport_input(rng.uniform(0, THETA_MAX), _random_eta(rng))
            sigma = pauli_direction(_random_direction(rng))
            for a in (observable_A1(), observable_A2()):
                p = joint_prob_minus_minus(a, ["ancilla", "alice"], sigma, ["bob"], s)
                self.assertGreaterEqual(p, -1e-12)
                self.assertLessEqual(p, 1 + 1e-12)

    def test_rejects_non_bivalent(self):
        s = teleport_input(0.2, ZERO_ANCILLA)
        with self.assertRaises(NotBivalentError):
            joint_prob_minus_minus(observable_A1(), ["ancilla", "alice"], Observable(np.diag([1.0, 0.5])),
                                   ["bob"], s)


class TestI3322(unittest.TestCase):
    def test_hand_oracle(self):
        value = i3322_teleport(THETA_MAX, ZERO_ANCILLA, ZERO_ANCILLA, ZERO_ANCILLA, Z_AXIS, Z_AXIS, Z_AXIS)
        self.assertAlmostEqual(value, -1.0, places=12)

    def test_product_state_value(self):
        eta = AncillaState.from_bloch(1.0, 0.4)
        x = np.array([1.0, 0.0, 0.0])
        self.assertAlmostEqual(i3322_teleport(0.0, eta, eta, eta, Z_AXIS, Z_AXIS, x), -0.5, places=12)
        self.assertAlmostEqual(i3322_rsp_vn(0.0, 0.1, 0.2, 0.3, Z_AXIS, Z_AXIS, x), -0.5, places=12)
        self.assertAlmostEqual(i3322_rsp_bell(0.0, 0.1, 0.2, 0.3, Z_AXIS, Z_AXIS, x), -0.5, places=12)
        self.assertAlmostEqual(i3322_rsp_vn(0.0, 0.1, 0.2, 0.3, -Z_AXIS, -Z_AXIS, x), -1.5, places=12)

    def test_rsp_maximum_at_maximal_entanglement(self):
        self.assertAlmostEqual(i3322_rsp_vn(THETA_MAX, *I3322_PHASES, *I3322_DIRECTIONS), 0.25, places=12)
        flipped = (I3322_PHASES[0] + np.pi, I3322_PHASES[1] + np.pi, I3322_PHASES[2])
        self.assertAlmostEqual(i3322_rsp_bell(THETA_MAX, *flipped, *I3322_DIRECTIONS), 0.25, places=12)

    def test_teleport_stays_below_its_maximum(self):
        rng = np.random.default_rng(5)
        ceiling = np.sqrt(5) / 2 - 1
        for _ in range(50):
            etas = [_random_eta(rng) for _ in range(3)]
            ns = [_random_direction(rng) for _ in range(3)]
            self.assertLessEqual(i3322_teleport(THETA_MAX, *etas, *ns), ceiling + 1e-12)

    def test_rsp_schemes_agree_up_to_phase_shift(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            theta = rng.uniform(0, THETA_MAX)
            phases = rng.uniform(0, 2 * np.pi, size=3)
            ns = [_random_direction(rng) for _ in range(3)]
            shifted = (phases[0] + np.pi, phases[1] + np.pi, phases[2])
            self.assertAlmostEqual(i3322_rsp_bell(theta, *shifted, *ns), i3322_rsp_vn(theta, *phases, *ns),
                                   places=12)


def test_evaluate_matches_direct_call():
    scenario = Scenario(ScenarioKind.RSP_VN_CHSH, np.pi / 8)
    settings = [0.0, np.pi / 2, np.pi / 2, np.pi / 4, np.pi / 2, -np.pi / 4]
    assert evaluate(scenario, settings) == pytest.approx(2.0, abs=1e-9)


def test_decode_settings_names_coordinates():
    named = decode_settings(Scenario(ScenarioKind.TELE_CHSH, 0.1), np.arange(8.0))
    assert list(named) == ["eta1_polar", "eta1_azimuth", "eta2_polar", "eta2_azimuth",
                           "n1_polar", "n1_azimuth", "n2_polar", "n2_azimuth"]
    assert named["n2_azimuth"] == 7.0


def test_decode_settings_errors():
    scenario = Scenario(ScenarioKind.RSP_VN_I3322, 0.1)
    with pytest.raises(DimensionError):
        decode_settings(scenario, np.zeros(8))
    with pytest.raises(ParameterRangeError):
        decode_settings(scenario, [np.nan] + [0.0] * 8)


@pytest.mark.parametrize("kind", list(ScenarioKind))
def test_canonical_settings_keep_value(kind, rng):
    scenario = Scenario(kind, 0.5)
    raw = rng.uniform(-10, 10, size=scenario.dimension)
    reduced = canonical_settings(scenario, raw)
    for p, v in zip(scenario.setting_layout, reduced):
        low, high = p.kind.bounds
        assert low <= v <= high
    assert evaluate(scenario, reduced) == pytest.approx(evaluate(scenario, raw), abs=1e-10)


@pytest.mark.parametrize("kind", list(ScenarioKind))
def test_values_change_smoothly_with_settings(kind, rng):
    scenario = Scenario(kind, 0.4)
    h = 1e-6
    for _ in range(5):
        x = rng.uniform(0, np.pi, size=scenario.dimension)
        base = evaluate(scenario, x)
        for i in range(scenario.dimension):
            step = np.zeros(scenario.dimension)
            step[i] = h
            assert abs(evaluate(scenario, x + step) - base) / h < 10


@pytest.mark.parametrize("kind", list(ScenarioKind))
def test_kernel_matches_state_vector_path(kind, rng):
    for theta in (0.0, 0.3, THETA_MAX):
        for ancilla in (ZERO_ANCILLA, AncillaState(0.6, 0.8j)):
            scenario = Scenario(kind, theta, ancilla)
            for _ in range(10):
                x = rng.uniform(-2 * np.pi, 2 * np.pi, size=scenario.dimension)
                assert evaluate(scenario, x) == pytest.approx(evaluate_direct(scenario, x), abs=1e-10)


def test_kernel_is_built_once_per_scenario():
    scenario = Scenario(ScenarioKind.TELE_I3322, 0.2)
    assert correlator_kernel(scenario) is correlator_kernel(Scenario(ScenarioKind.TELE_I3322, 0.2))
    assert correlator_kernel(scenario) is not correlator_kernel(Scenario(ScenarioKind.TELE_I3322, 0.3))
