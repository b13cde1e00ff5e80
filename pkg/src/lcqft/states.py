"""Quasifree states on the field algebra.

A quasifree state is fixed by its complex bilinear two-point kernel
W = mu + (i/2) sigma, with mu the real symmetric covariance; it evaluates on
a symmetric monomial phi_1 ... phi_k as the perfect-matching (hafnian) sum of
mu over the index pairs, and is extended linearly over the sparse terms.

The vacuum kernel is built per species from the exact one-step evolution map:
an elliptic mode with cos(Omega) = 1 - dt^2 w^2 / 2 has the invariant
covariance of a harmonic oscillator at the effective frequency
w_eff = w sqrt(1 - dt^2 w^2 / 4), so invariance under the lattice dynamics
holds at machine precision rather than up to discretization error. Massless
species get a fixed unit-width reference Gaussian on every mode (the spatial
zero mode has no ground state on a compact Cauchy surface); that reference is
flagged, since it is not invariant under the affine gauge directions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import AlgebraElement, check_degree_cap
from .dynamics import symplectic_matrix
from .errors import LcqftError
from .spacetime import LatticeSpacetime

DEFAULT_DEGREE_CAP = 8


def mode_frequencies(spacetime: LatticeSpacetime, mass: float) -> np.ndarray:
    """Effective per-mode frequencies of the one-step map for one species.

    Elliptic modes get w_eff(k) = w(k) sqrt(1 - dt^2 w(k)^2 / 4) with
    w(k)^2 = m^2 + 4 sin^2(pi k / N), the frequency whose oscillator
    covariance the exact one-step map leaves invariant. The massless spatial
    zero mode is parabolic (a free particle, no ground state) and gets a
    fixed unit-width reference instead.
    """
    N, dt = spacetime.n_sites, spacetime.dt
    k = np.arange(N)
    w2 = mass * mass + 4.0 * np.sin(np.pi * k / N) ** 2
    if np.any(dt * dt * w2 >= 4.0):
        raise LcqftError(
            f"mode of mass {mass} is not elliptic at dt={dt}; no ground state")
    if mass == 0.0:
        out = np.ones(N)
        out[1:] = np.sqrt(w2[1:]) * np.sqrt(1.0 - dt * dt * w2[1:] / 4.0)
        return out
    return np.sqrt(w2) * np.sqrt(1.0 - dt * dt * w2 / 4.0)


def _circulant_from_eigenvalues(vals: np.ndarray) -> np.ndarray:
    """Real symmetric circulant with the given Fourier eigenvalues."""
    col = np.fft.ifft(vals).real
    n = len(vals)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return col[idx]


@dataclass(frozen=True, eq=False)
class QuasifreeState:
    """Two-point kernel plus Wick evaluator."""

    spacetime: LatticeSpacetime
    mu: np.ndarray  # real symmetric covariance over the canonical basis
    label: str = "vacuum"
    flags: tuple[str, ...] = ()
    degree_cap: int = DEFAULT_DEGREE_CAP

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).copy()
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    @property
    def two_point(self) -> np.ndarray:
        """W = mu + (i/2) sigma over the canonical basis."""
        return self.mu + 0.5j * symplectic_matrix(self.spacetime)

    def evaluate(self, a: AlgebraElement) -> complex:
        """Linear extension of the hafnian pairing sum; omega(1) = 1."""
        check_degree_cap(a, self.degree_cap)
        total = 0.0 + 0.0j
        for idx, c in a.terms.items():
            total += c * _hafnian(self.mu, idx)
        return total

    def kernel_to_json(self) -> dict:
        W = self.two_point
        return {"re": W.real.tolist(), "im": W.imag.tolist(),
                "label": self.label, "flags": list(self.flags)}


def _hafnian(mu: np.ndarray, idx: tuple[int, ...]) -> float:
    """Sum over perfect matchings of mu-products; 0 for odd length."""
    k = len(idx)
    if k == 0:
        return 1.0
    if k % 2:
        return 0.0

    def rec(rest: tuple[int, ...]) -> float:
        if not rest:
            return 1.0
        i0 = rest[0]
        total = 0.0
        for j in range(1, len(rest)):
            total += mu[i0, rest[j]] * rec(rest[1:j] + rest[j + 1:])
        return total

    return rec(idx)


def vacuum_state(spacetime: LatticeSpacetime) -> QuasifreeState:
    """Product of per-species vacua (massless species: reference Gaussian)."""
    S, N = spacetime.n_species, spacetime.n_sites
    half = S * N
    mu = np.zeros((2 * half, 2 * half))
    flags = []
    for s, mass in enumerate(spacetime.spectrum.species_masses):
        freqs = mode_frequencies(spacetime, mass)
        omega = _circulant_from_eigenvalues(freqs)
        omega_inv = _circulant_from_eigenvalues(1.0 / freqs)
        block = slice(s * N, (s + 1) * N)
        mu[block, block] = 0.5 * omega
        pblock = slice(half + s * N, half + (s + 1) * N)
        mu[pblock, pblock] = 0.5 * omega_inv
        if mass == 0.0 and "massless-reference" not in flags:
            flags.append("massless-reference")
            flags.append("not-invariant-under-affine-shifts")
    return QuasifreeState(spacetime, mu, label="vacuum", flags=tuple(flags))


@dataclass(frozen=True, eq=False)
class PulledBackState:
    """omega composed with an algebra endomorphism; still a state when the
    endomorphism is a *-homomorphism (positivity and normalization carry over)."""

    base: QuasifreeState
    endo: Callable[[AlgebraElement], AlgebraElement]
    label: str = "pullback"

    def evaluate(self, a: AlgebraElement) -> complex:
        return self.base.evaluate(self.endo(a))


def pull_back(state: QuasifreeState,
              endo: Callable[[AlgebraElement], AlgebraElement],
              label: str = "pullback") -> PulledBackState:
    return PulledBackState(state, endo, label)
