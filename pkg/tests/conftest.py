"""Shared builders for the test suite."""
from __future__ import annotations

import numpy as np

from lindquad import HamiltonianForm, LindbladChannel, OpenSystem


def damping_bath(gamma: float, nbar: float = 0.0, hbar: float = 1.0) -> OpenSystem:
    """Photon-bath channels with the oscillator rotation removed (H = 0).

    Same noise matrix and dissipation coefficient as ``photon_bath`` but in
    the co-rotating frame, so fringes of an evolving cat state stay put on
    the momentum axis.
    """
    c = np.sqrt(gamma * (nbar + 1.0) / 2.0)
    channels = [LindbladChannel(l_re=[0.0, c], l_im=[c, 0.0])]
    if nbar > 0.0:
        d = np.sqrt(gamma * nbar / 2.0)
        channels.append(LindbladChannel(l_re=[0.0, d], l_im=[-d, 0.0]))
    return OpenSystem(hamiltonian=HamiltonianForm(matrix=np.zeros((2, 2))),
                      channels=tuple(channels), hbar=hbar)


def channel_with_alpha(rng: np.random.Generator, alpha: float) -> LindbladChannel:
    """Random channel whose dissipation coefficient is exactly ``alpha``.

    With l'' = -(alpha/|l'|^2) J l' + c l' the wedge-trace picks up exactly
    ``alpha`` from the first term and nothing from the second.
    """
    j = np.array([[0.0, -1.0], [1.0, 0.0]])
    l_re = rng.normal(size=2)
    while np.linalg.norm(l_re) < 0.3:
        l_re = rng.normal(size=2)
    l_im = -(alpha / (l_re @ l_re)) * (j @ l_re) + rng.normal() * l_re
    return LindbladChannel(l_re=l_re, l_im=l_im)


def random_hamiltonian(rng: np.random.Generator, regime: str) -> HamiltonianForm:
    """Random symmetric Hamiltonian matrix of the requested regime."""
    if regime == "parabolic":
        # rank-one positive form rotated by a random orthogonal matrix
        theta = rng.uniform(0.0, 2.0 * np.pi)
        rot = np.array([[np.cos(theta), -np.sin(theta)],
                        [np.sin(theta), np.cos(theta)]])
        core = np.diag([rng.uniform(0.2, 1.5), 0.0])
        return HamiltonianForm(matrix=rot @ core @ rot.T)
    h = rng.normal(size=(2, 2))
    h = 0.5 * (h + h.T)
    want_positive = regime == "elliptic"
    while (np.linalg.det(h) > 0) != want_positive or abs(np.linalg.det(h)) < 0.05:
        h = rng.normal(size=(2, 2))
        h = 0.5 * (h + h.T)
    return HamiltonianForm(matrix=h)


def random_system(rng: np.random.Generator, regime: str,
                  alpha: float | None = None,
                  n_channels: int = 2) -> OpenSystem:
    """Random open system; dissipation coefficient pinned when requested."""
    ham = random_hamiltonian(rng, regime)
    channels = []
    if alpha is None:
        for _ in range(n_channels):
            channels.append(LindbladChannel(l_re=rng.normal(size=2),
                                            l_im=rng.normal(size=2)))
    else:
        channels.append(channel_with_alpha(rng, alpha))
        for _ in range(n_channels - 1):
            channels.append(channel_with_alpha(rng, 0.0))
    return OpenSystem(hamiltonian=ham, channels=tuple(channels))


def random_symplectic(rng: np.random.Generator, scale: float = 0.6) -> np.ndarray:
    """Random symplectic matrix exp(J S) with S symmetric."""
    from scipy.linalg import expm

    j = np.array([[0.0, -1.0], [1.0, 0.0]])
    s = rng.normal(scale=scale, size=(2, 2))
    s = 0.5 * (s + s.T)
    return expm(j @ s)
