"""Tests for positivity thresholds, purity and state reconstruction."""
from __future__ import annotations

import json

import numpy as np
import pytest

from conftest import damping_bath, random_symplectic
from lindquad import (AsymptoticInvalid, CatParameters, ConfigError,
                      HamiltonianForm, LindbladChannel, OpenSystem,
                      cat_state, cat_zero_crossing_time, coherent_state,
                      evolved_state, linear_entropy, photon_bath,
                      positivity_time, purity, purity_asymptotic,
                      purity_curve, reconstruct, symplectic_transform,
                      write_purity_csv)


def _parabolic_system(d_prime: float, eps: float, d_second: float) -> OpenSystem:
    # sign convention of the reference sweep (and the CLI): eps = -1 damps
    # the motion (alpha > 0), eps = +1 pumps it
    ham = HamiltonianForm(matrix=[[0.5, 0.0], [0.0, 0.0]], linear=[0.0, 1.0])
    ch = LindbladChannel(l_re=[0.0, np.sqrt(d_prime)],
                         l_im=[-eps * np.sqrt(d_second), 0.0])
    return OpenSystem(hamiltonian=ham, channels=(ch,))


# Solver outputs for the momentum-coupling sweep at D' = 2, frozen once the
# determinant route had been cross-checked against the closed forms.  The
# looser comparisons against the two-to-three digit reference values live in
# the acceptance suite.
FROZEN_SWEEP = {
    (-1.0, 0.0): 0.9306048591020732,
    (-1.0, 0.1): 0.6404224516205653,
    (-1.0, 1.0): 0.244211702563023,
    (-1.0, 10.0): 0.07749347928770056,
    (-1.0, 100.0): 0.024506444948095535,
    (1.0, 0.0): 0.9306048591020732,
    (1.0, 0.1): 1.0400041398985713,
    (1.0, 1.0): 1.0241550094795204,
    (1.0, 10.0): 0.7537419773963691,
    (1.0, 100.0): 0.39921103041510286,
}


# ---------------------------------------------------------------------------
# positivity threshold


def test_photon_bath_threshold_closed_form() -> None:
    for gamma, nbar in ((1.0, 0.0), (1.0, 0.5), (2.0, 3.0)):
        result = positivity_time(photon_bath(gamma=gamma, nbar=nbar))
        expect = np.log(1.0 + 1.0 / (2.0 * nbar + 1.0)) / gamma
        assert result.reached
        assert result.t_p == pytest.approx(expect, rel=1e-11)
        assert result.det_value == pytest.approx(0.25, rel=1e-9)


def test_photon_bath_threshold_is_frequency_independent() -> None:
    base = positivity_time(photon_bath(gamma=1.0, nbar=0.5, omega=1.0))
    for omega in (0.0, 2.7):
        other = positivity_time(photon_bath(gamma=1.0, nbar=0.5, omega=omega))
        assert other.t_p == pytest.approx(base.t_p, rel=1e-9)


def test_threshold_equals_fringe_death_time() -> None:
    # two independent routes: determinant crossing vs the vanishing of the
    # last interference zero of an evolving cat
    for gamma, nbar in ((1.0, 0.0), (2.0, 3.0)):
        solver = positivity_time(photon_bath(gamma=gamma, nbar=nbar)).t_p
        fringe = cat_zero_crossing_time(
            CatParameters(zeta=2.0, gamma=gamma, nbar=nbar))
        assert solver == pytest.approx(fringe, rel=1e-8)


def test_momentum_noise_hand_integral() -> None:
    # pure momentum coupling: M(-t) integrates by hand to
    # [[D' t, -D' t^2 / 2], [-D' t^2/2, D' t^3/3]] whose determinant is
    # D'^2 t^4 / 12; threshold at (3/D'^2)^(1/4)
    from lindquad import damping_matrix

    for d_prime in (2.0, 0.7):
        sys = _parabolic_system(d_prime, 1.0, 0.0)
        for t in (0.4, 0.93):
            det = damping_matrix(sys, -t).det
            assert det == pytest.approx(d_prime ** 2 * t ** 4 / 12.0,
                                        rel=1e-10)
        result = positivity_time(sys)
        assert result.t_p == pytest.approx((3.0 / d_prime ** 2) ** 0.25,
                                           rel=1e-9)


def test_momentum_coupling_sweep_frozen_values() -> None:
    for (eps, d_second), expect in FROZEN_SWEEP.items():
        result = positivity_time(_parabolic_system(2.0, eps, d_second))
        assert result.reached
        assert result.t_p == pytest.approx(expect, rel=1e-9)


def test_threshold_unreached_below_horizon() -> None:
    result = positivity_time(photon_bath(gamma=1.0), horizon=1e-6)
    assert not result.reached
    assert result.t_p is None
    assert result.limit < 1e-10
    data = result.to_dict()
    assert data["status"] == "unreached"
    assert set(data) == {"status", "limit", "horizon", "iterations"}


def test_threshold_without_noise() -> None:
    free = OpenSystem(hamiltonian=HamiltonianForm(matrix=np.eye(2)))
    result = positivity_time(free)
    assert not result.reached
    assert result.limit == 0.0
    with pytest.raises(ConfigError):
        positivity_time(free, horizon=0.0)


def test_threshold_saturates_for_pure_gain() -> None:
    # a pure amplification channel on the oscillator drives the determinant
    # to the threshold value from below without ever crossing it
    ham = HamiltonianForm(matrix=0.5 * np.eye(2))
    d = 0.3
    ch = LindbladChannel(l_re=[0.0, d], l_im=[-d, 0.0])
    sys = OpenSystem(hamiltonian=ham, channels=(ch,))
    assert sys.alpha == pytest.approx(-d * d)
    result = positivity_time(sys, horizon=60.0)
    assert not result.reached
    assert 0.2 < result.limit < 0.25
    assert result.limit == pytest.approx(0.25, abs=1e-3)
    reported = json.loads(result.to_json())
    assert reported["limit"] == pytest.approx(result.limit)


def test_threshold_reported_as_json() -> None:
    result = positivity_time(photon_bath(gamma=1.0))
    data = json.loads(result.to_json())
    assert data["status"] == "reached"
    assert data["t_p"] == pytest.approx(np.log(2.0), rel=1e-10)


def test_threshold_is_symplectically_invariant() -> None:
    rng = np.random.default_rng(40)
    sys = photon_bath(gamma=1.0, nbar=0.5)
    base = positivity_time(sys).t_p
    for _ in range(5):
        c = random_symplectic(rng)
        moved = positivity_time(symplectic_transform(sys, c)).t_p
        assert moved == pytest.approx(base, rel=1e-9)


def test_weak_coupling_elliptic_vs_hyperbolic() -> None:
    # identical weak channels: the rotating system loses its last negativity
    # on the coupling timescale, the stretching system on the dynamical one
    alpha = 0.01
    c = np.sqrt(alpha)
    channels = (LindbladChannel(l_re=[0.0, c], l_im=[c, 0.0]),)
    elliptic = OpenSystem(hamiltonian=HamiltonianForm(matrix=0.5 * np.eye(2)),
                          channels=channels)
    hyperbolic = OpenSystem(
        hamiltonian=HamiltonianForm(matrix=[[0.0, 0.5], [0.5, 0.0]]),
        channels=channels)
    t_ell = positivity_time(elliptic, horizon=200.0).t_p
    t_hyp = positivity_time(hyperbolic, horizon=200.0).t_p
    assert t_ell == pytest.approx(np.log(2.0) / (2.0 * alpha), rel=1e-6)
    assert t_hyp < t_ell
    assert t_hyp < 10.0  # saturates near the stretching time, not 1/alpha


# ---------------------------------------------------------------------------
# purity and linear entropy


def test_purity_of_relaxing_coherent_state() -> None:
    state = coherent_state((0.7, -0.2))
    for gamma, nbar in ((0.8, 1.3), (1.0, 0.0)):
        sys = photon_bath(gamma=gamma, nbar=nbar)
        for t in (0.3, 1.0, 2.5):
            got = purity(sys, state, t)
            egt = np.exp(gamma * t)
            expect = egt / (1.0 + (egt - 1.0) * (2.0 * nbar + 1.0))
            assert got == pytest.approx(expect, rel=1e-10)


def test_purity_thermal_limit() -> None:
    state = coherent_state((0.5, 0.5))
    for nbar in (0.5, 2.0):
        sys = photon_bath(gamma=1.0, nbar=nbar)
        assert purity(sys, state, 18.0) == pytest.approx(
            1.0 / (2.0 * nbar + 1.0), rel=1e-6)


def test_cat_purity_dips_and_recovers_under_pure_loss() -> None:
    sys = photon_bath(gamma=1.0, nbar=0.0)
    state = cat_state(CatParameters(zeta=2.0))
    early = purity(sys, state, 0.4)
    assert purity(sys, state, 0.0) == pytest.approx(1.0, rel=1e-8)
    assert early < 0.75
    # residual mixedness decays like zeta^2 e^{-gamma t}
    late = purity(sys, state, 12.0)
    assert late > early
    assert late == pytest.approx(1.0, abs=1e-4)


def test_linear_entropy_complements_purity() -> None:
    sys = photon_bath(gamma=1.0, nbar=0.5)
    state = coherent_state((0.0, 0.0))
    assert linear_entropy(sys, state, 0.9) == pytest.approx(
        1.0 - purity(sys, state, 0.9), abs=1e-12)


def test_purity_validation() -> None:
    sys = photon_bath(gamma=1.0)
    state = coherent_state((0.0, 0.0))
    with pytest.raises(ConfigError):
        purity(sys, state, -0.1)


def test_purity_asymptote_matches_quadrature() -> None:
    sys = photon_bath(gamma=1.0, nbar=0.5)
    for state in (coherent_state((0.4, 0.0)),
                  cat_state(CatParameters(zeta=2.0, nbar=0.5))):
        exact = purity(sys, state, 7.0)
        approx = purity_asymptotic(sys, 7.0)
        assert abs(approx - exact) / exact < 1e-2


def test_purity_asymptote_rejects_short_times() -> None:
    sys = photon_bath(gamma=1.0, nbar=0.5)
    with pytest.raises(AsymptoticInvalid) as exc:
        purity_asymptotic(sys, 0.5)
    assert exc.value.eigenvalue < 50.0


def test_purity_asymptote_never_valid_for_weakly_damped_hyperbolic() -> None:
    # |alpha| below the stretching rate: the contracting direction keeps one
    # eigenvalue of the reversed damping matrix finite forever
    ham = HamiltonianForm(matrix=[[0.0, 0.5], [0.5, 0.0]])  # sigma = 1
    c = np.sqrt(0.3)
    ch = LindbladChannel(l_re=[0.0, c], l_im=[c, 0.0])  # alpha = 0.3
    sys = OpenSystem(hamiltonian=ham, channels=(ch,))
    eigenvalues = []
    for t in (10.0, 20.0, 40.0):
        with pytest.raises(AsymptoticInvalid) as exc:
            purity_asymptotic(sys, t)
        eigenvalues.append(exc.value.eigenvalue)
    # the blocking eigenvalue converges instead of growing with t
    assert eigenvalues[2] < 1.2 * eigenvalues[1]


def test_purity_curve_rows_and_csv(tmp_path) -> None:
    sys = photon_bath(gamma=1.0, nbar=0.5)
    state = coherent_state((0.0, 0.0))
    curve = purity_curve(sys, state, [0.2, 8.0])
    methods = [m for m in curve.methods]
    assert methods.count("quadrature") == 2
    assert methods.count("asymptotic") == 1  # only the late time qualifies
    path = str(tmp_path / "purity.csv")
    write_purity_csv(curve, path)
    lines = (tmp_path / "purity.csv").read_text().splitlines()
    assert lines[0] == "t,purity,linear_entropy,method"
    assert len(lines) == 4
    t, value, entropy, method = lines[1].split(",")
    assert float(t) == 0.2
    assert float(value) + float(entropy) == pytest.approx(1.0, abs=1e-12)
    assert method == "quadrature"


# ---------------------------------------------------------------------------
# reconstruction


def test_reconstruction_round_trip() -> None:
    sys = photon_bath(gamma=1.0, nbar=0.0)
    state = cat_state(CatParameters(zeta=2.0))
    t = 0.3
    recovered = reconstruct(sys, evolved_state(sys, state, t), t)
    rng = np.random.default_rng(41)
    xi = rng.normal(scale=1.5, size=(200, 2))
    reliable = recovered.reliability(xi)
    assert reliable.any()
    orig = state(xi[reliable])
    back = recovered(xi[reliable])
    assert np.max(np.abs(back - orig)) / np.max(np.abs(orig)) < 1e-12


def test_reconstruction_reliability_mask() -> None:
    sys = photon_bath(gamma=1.0, nbar=1.0)
    state = coherent_state((0.0, 0.0))
    recovered = reconstruct(sys, evolved_state(sys, state, 1.0), 1.0,
                            floor=1e-6)
    assert recovered.reliability(np.zeros((1, 2)))[0]
    far = np.array([[40.0, 0.0]])
    assert not recovered.reliability(far)[0]
    assert not recovered.pure


def test_reconstruction_validation() -> None:
    sys = photon_bath(gamma=1.0)
    evolved = evolved_state(sys, coherent_state((0.0, 0.0)), 0.5)
    for floor in (0.0, -1.0, 1.5):
        with pytest.raises(ConfigError):
            reconstruct(sys, evolved, 0.5, floor=floor)
