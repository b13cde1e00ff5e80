"""Classical multi-species Klein-Gordon dynamics on the lattice.

Cauchy data lives on the t=0 slice: per-species field values q and conjugate
momenta p = dq/dt, both complex (S, N) arrays. Time stepping is kick-drift-kick
(velocity Verlet), so every step is an exact linear symplectomorphism and is
inverted exactly by the opposite step.

The canonical basis of the solution space is: index s*N + x for the q-channel
of species s at site x, and S*N + s*N + x for the p-channel. All algebra
modules share this convention.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    LcqftError,
    NotChargeZero,
    OutOfRange,
    SpacetimeMismatch,
    SupportViolation,
)
from .spacetime import LatticeSpacetime

RICHARDSON_STEPS = (1e-2, 5e-3, 2.5e-3)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Solution:
    """Element of the complexified solution space: Cauchy data at t=0."""

    spacetime: LatticeSpacetime
    q: np.ndarray  # (S, N) complex
    p: np.ndarray  # (S, N) complex

    def __post_init__(self):
        S, N = self.spacetime.n_species, self.spacetime.n_sites
        object.__setattr__(self, "q", _freeze(np.broadcast_to(self.q, (S, N)).copy()))
        object.__setattr__(self, "p", _freeze(np.broadcast_to(self.p, (S, N)).copy()))

    # vector-space structure
    def __add__(self, other: "Solution") -> "Solution":
        _same_spacetime(self, other)
        return Solution(self.spacetime, self.q + other.q, self.p + other.p)

    def __sub__(self, other: "Solution") -> "Solution":
        _same_spacetime(self, other)
        return Solution(self.spacetime, self.q - other.q, self.p - other.p)

    def __rmul__(self, scalar: complex) -> "Solution":
        return Solution(self.spacetime, scalar * self.q, scalar * self.p)

    def __neg__(self) -> "Solution":
        return Solution(self.spacetime, -self.q, -self.p)

    def conjugate(self) -> "Solution":
        """Antilinear involution (entrywise complex conjugation of the data)."""
        return Solution(self.spacetime, self.q.conj(), self.p.conj())

    def vec(self) -> np.ndarray:
        """Coefficients over the canonical basis, length 2*S*N."""
        return np.concatenate([self.q.ravel(), self.p.ravel()])

    def norm(self) -> float:
        return float(np.linalg.norm(self.vec()))

    def to_fixture(self) -> dict:
        return {
            "spectrum": [[m, k] for m, k in self.spacetime.spectrum.entries],
            "n_sites": self.spacetime.n_sites,
            "q": [[[float(z.real), float(z.imag)] for z in row] for row in self.q],
            "p": [[[float(z.real), float(z.imag)] for z in row] for row in self.p],
        }

    @staticmethod
    def from_fixture(data: dict, spacetime: LatticeSpacetime) -> "Solution":
        q = np.array([[complex(re, im) for re, im in row] for row in data["q"]])
        p = np.array([[complex(re, im) for re, im in row] for row in data["p"]])
        return Solution(spacetime, q, p)


def _same_spacetime(a, b):
    if a.spacetime != b.spacetime:
        raise SpacetimeMismatch("operands live on different spacetimes")


def solution_from_vec(spacetime: LatticeSpacetime, vec: np.ndarray) -> Solution:
    S, N = spacetime.n_species, spacetime.n_sites
    vec = np.asarray(vec, dtype=complex).ravel()
    return Solution(spacetime, vec[: S * N].reshape(S, N), vec[S * N:].reshape(S, N))


def basis_solution(spacetime: LatticeSpacetime, index: int) -> Solution:
    vec = np.zeros(spacetime.data_dim, dtype=complex)
    vec[index] = 1.0
    return solution_from_vec(spacetime, vec)


def zero_solution(spacetime: LatticeSpacetime) -> Solution:
    return solution_from_vec(spacetime, np.zeros(spacetime.data_dim))


def unit_constant_solution(spacetime: LatticeSpacetime, species: int) -> Solution:
    """Constant unit solution in a massless species slot (q=1, p=0)."""
    if spacetime.spectrum.species_masses[species] != 0.0:
        raise LcqftError("constant solutions only solve the massless equation")
    q = np.zeros((spacetime.n_species, spacetime.n_sites), dtype=complex)
    q[species] = 1.0
    return Solution(spacetime, q, np.zeros_like(q))


def random_solution(rng: np.random.Generator, spacetime: LatticeSpacetime,
                    complex_data: bool = True, integer: bool = False) -> Solution:
    shape = (spacetime.n_species, spacetime.n_sites)
    if integer:
        q = rng.integers(-3, 4, size=shape).astype(complex)
        p = rng.integers(-3, 4, size=shape).astype(complex)
        if complex_data:
            q = q + 1j * rng.integers(-3, 4, size=shape)
            p = p + 1j * rng.integers(-3, 4, size=shape)
    else:
        q = rng.standard_normal(shape) + (1j * rng.standard_normal(shape) if complex_data else 0)
        p = rng.standard_normal(shape) + (1j * rng.standard_normal(shape) if complex_data else 0)
    return Solution(spacetime, q, p)


# -- symplectic form -----------------------------------------------------------

def symplectic_form(a: Solution, b: Solution) -> complex:
    """sigma(a, b) = sum over species and sites of (q_a p_b - q_b p_a).

    Bilinear, antisymmetric; sigma(conj a, conj b) = conj sigma(a, b).
    """
    _same_spacetime(a, b)
    return complex(np.sum(a.q * b.p) - np.sum(b.q * a.p))


def symplectic_matrix(spacetime: LatticeSpacetime) -> np.ndarray:
    """Matrix J with sigma(e_i, e_j) = J[i, j] over the canonical basis."""
    half = spacetime.n_species * spacetime.n_sites
    J = np.zeros((2 * half, 2 * half))
    J[:half, half:] = np.eye(half)
    J[half:, :half] = -np.eye(half)
    return J


# -- perturbations and test functions -------------------------------------------

@dataclass(frozen=True, eq=False)
class Perturbation:
    """Compactly supported perturbation of the field equation.

    kind="mass": pointwise shift of the squared-mass term, identical across
    species (the default throughout).
    kind="gradient": metric-like perturbation of the spatial stiffness; the
    site values act as edge weights 1 + v on the couplings, so constants stay
    solutions of the perturbed massless equation.
    """

    spacetime: LatticeSpacetime
    v: np.ndarray  # (n_steps + 1, N) real
    kind: str = "mass"

    def __post_init__(self):
        T1, N = self.spacetime.n_slices, self.spacetime.n_sites
        v = np.asarray(self.v, dtype=float)
        if v.shape != (T1, N):
            raise SupportViolation(f"v must have shape ({T1}, {N})")
        if np.any(v[0] != 0) or np.any(v[-1] != 0):
            raise SupportViolation("perturbation needs clean first and last slices")
        if self.kind not in ("mass", "gradient"):
            raise LcqftError(f"unknown perturbation kind {self.kind!r}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    def scaled(self, s: float) -> "Perturbation":
        return Perturbation(self.spacetime, s * self.v, self.kind)

    def support_sites(self, t: int) -> np.ndarray:
        """Sites touched by the perturbation at slice t (edges count both ends)."""
        idx = set(np.nonzero(self.v[t])[0].tolist())
        if self.kind == "gradient":
            idx |= {(x + 1) % self.spacetime.n_sites for x in idx}
        return np.array(sorted(idx), dtype=int)


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Spacetime-smearing function, compactly supported in slices [1, T-2]."""

    spacetime: LatticeSpacetime
    values: np.ndarray  # (S, n_steps + 1, N) complex

    def __post_init__(self):
        S, T1, N = (self.spacetime.n_species, self.spacetime.n_slices,
                    self.spacetime.n_sites)
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (S, T1, N):
            raise SupportViolation(f"values must have shape ({S}, {T1}, {N})")
        if self.spacetime.n_steps < 4:
            raise SupportViolation("time extent too short for a test function")
        bad = np.any(vals[:, 0] != 0) or np.any(vals[:, -2:] != 0)
        if bad:
            raise SupportViolation("support must stay inside slices [1, T-2]")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def conjugate(self) -> "TestFunction":
        return TestFunction(self.spacetime, self.values.conj())

    def __add__(self, other: "TestFunction") -> "TestFunction":
        _same_spacetime(self, other)
        return TestFunction(self.spacetime, self.values + other.values)

    def __rmul__(self, scalar: complex) -> "TestFunction":
        return TestFunction(self.spacetime, scalar * self.values)

    def to_fixture(self) -> dict:
        return {
            "spectrum": [[m, k] for m, k in self.spacetime.spectrum.entries],
            "n_sites": self.spacetime.n_sites,
            "n_steps": self.spacetime.n_steps,
            "values": [[[[float(z.real), float(z.imag)] for z in row]
                        for row in slab] for slab in self.values],
        }

    @staticmethod
    def from_fixture(data: dict, spacetime: LatticeSpacetime) -> "TestFunction":
        vals = np.array([[[complex(re, im) for re, im in row]
                          for row in slab] for slab in data["values"]])
        return TestFunction(spacetime, vals)


def delta_test_function(spacetime: LatticeSpacetime, species: int, t: int, x: int
                        ) -> TestFunction:
    vals = np.zeros((spacetime.n_species, spacetime.n_slices, spacetime.n_sites),
                    dtype=complex)
    vals[species, t, x % spacetime.n_sites] = 1.0
    return TestFunction(spacetime, vals)


# -- stepping kernel -------------------------------------------------------------

def _masses_sq(spacetime: LatticeSpacetime) -> np.ndarray:
    m = np.asarray(spacetime.spectrum.species_masses)
    return (m * m)[:, None]


def _accel(q: np.ndarray, spacetime: LatticeSpacetime,
           v_slice: np.ndarray | None, kind: str) -> np.ndarray:
    """Acceleration dd q/dt dt on one slice; q has shape (..., S, N)."""
    if kind == "gradient" and v_slice is not None:
        w = 1.0 + v_slice  # edge weight between x and x+1
        dq = np.roll(q, -1, axis=-1) - q
        flux = w * dq
        lap = flux - np.roll(flux, 1, axis=-1)
    else:
        lap = np.roll(q, -1, axis=-1) - 2.0 * q + np.roll(q, 1, axis=-1)
    a = lap - _masses_sq(spacetime) * q
    if kind == "mass" and v_slice is not None:
        a = a - v_slice * q
    return a


def evolve_data(q: np.ndarray, p: np.ndarray, spacetime: LatticeSpacetime,
                t_from: int, t_to: int, pert: Perturbation | None = None,
                source: np.ndarray | None = None,
                trajectory: bool = False):
    """Evolve Cauchy data from slice t_from to slice t_to.

    q, p may carry arbitrary leading batch axes before the trailing (S, N).
    The perturbation (if any) is indexed by absolute slice; slices outside its
    table count as zero. `source` is a (S, T1, N) inhomogeneity entering like
    the mass-kind perturbation force. With trajectory=True, returns stacked
    (q, p) at every visited slice from t_from to t_to inclusive.
    """
    dt = spacetime.dt
    q = np.array(q, dtype=complex)
    p = np.array(p, dtype=complex)
    direction = 1 if t_to >= t_from else -1
    h = dt * direction

    def v_at(t):
        if pert is None:
            return None
        if 0 <= t < pert.v.shape[0]:
            return pert.v[t]
        return None

    def force(qq, t):
        a = _accel(qq, spacetime, v_at(t), pert.kind if pert else "mass")
        if source is not None and 0 <= t < source.shape[1]:
            a = a + source[:, t]
        return a

    frames = [(q.copy(), p.copy())] if trajectory else None
    t = t_from
    a = force(q, t)
    while t != t_to:
        p_half = p + 0.5 * h * a
        q = q + h * p_half
        t += direction
        a = force(q, t)
        p = p_half + 0.5 * h * a
        if trajectory:
            frames.append((q.copy(), p.copy()))
    if trajectory:
        return (np.stack([f[0] for f in frames]), np.stack([f[1] for f in frames]))
    return q, p


def step(sol: Solution, direction: str = "forward") -> Solution:
    """One kick-drift-kick step of the free equation; exactly invertible."""
    d = 1 if direction == "forward" else -1
    q, p = evolve_data(sol.q, sol.p, sol.spacetime, 0, d)
    return Solution(sol.spacetime, q, p)


def evolve(sol: Solution, steps: int, pert: Perturbation | None = None) -> Solution:
    q, p = evolve_data(sol.q, sol.p, sol.spacetime, 0, steps, pert=pert)
    return Solution(sol.spacetime, q, p)


def trajectory(sol: Solution, t_to: int | None = None, pert: Perturbation | None = None):
    """Field values and momenta on every slice 0..t_to, shapes (T1, S, N)."""
    if t_to is None:
        t_to = sol.spacetime.n_steps
    return evolve_data(sol.q, sol.p, sol.spacetime, 0, t_to, pert=pert,
                       trajectory=True)


def translate_solution(sol: Solution, dt_steps: int, dx_sites: int) -> Solution:
    """(T phi)(t, x) = phi(t - dt_steps, x - dx_sites), read off at t=0."""
    q, p = evolve_data(sol.q, sol.p, sol.spacetime, 0, -dt_steps)
    return Solution(sol.spacetime,
                    np.roll(q, dx_sites, axis=-1),
                    np.roll(p, dx_sites, axis=-1))


def matrix_of(map_fn, spacetime: LatticeSpacetime) -> np.ndarray:
    """Dense matrix of a linear map on the solution space, by applying it to
    the canonical basis batch at once (map_fn acts on (q, p) batch arrays)."""
    dim = spacetime.data_dim
    S, N = spacetime.n_species, spacetime.n_sites
    eye = np.eye(dim, dtype=complex)
    qb = eye[:, : S * N].reshape(dim, S, N)
    pb = eye[:, S * N:].reshape(dim, S, N)
    q_out, p_out = map_fn(qb, pb)
    return np.concatenate(
        [q_out.reshape(dim, S * N), p_out.reshape(dim, S * N)], axis=1
    ).T


def evolution_matrix(spacetime: LatticeSpacetime, steps: int = 1,
                     pert: Perturbation | None = None) -> np.ndarray:
    return matrix_of(
        lambda qb, pb: evolve_data(qb, pb, spacetime, 0, steps, pert=pert),
        spacetime)


@lru_cache(maxsize=32)
def one_step_matrix(spacetime: LatticeSpacetime) -> np.ndarray:
    return evolution_matrix(spacetime, 1).real


def shift_matrix(spacetime: LatticeSpacetime) -> np.ndarray:
    """Matrix of the one-site spatial translation on the data space."""
    return matrix_of(
        lambda qb, pb: (np.roll(qb, 1, axis=-1), np.roll(pb, 1, axis=-1)),
        spacetime).real


# -- causal propagator -----------------------------------------------------------

def propagate_test_function(f: TestFunction) -> Solution:
    """E f: difference of retarded and advanced solutions, read at t=0.

    Computed by integrating zero data forward through the source (yielding the
    retarded solution at the final clean slice, where the advanced one
    vanishes) and transporting back with the free evolution.
    """
    st = f.spacetime
    S, N = st.n_species, st.n_sites
    q0 = np.zeros((S, N), dtype=complex)
    T = st.n_steps
    q, p = evolve_data(q0, q0, st, 0, T, source=f.values)
    q, p = evolve_data(q, p, st, T, 0)
    return Solution(st, q, p)


def discrete_kg_operator(f_values: np.ndarray, spacetime: LatticeSpacetime
                         ) -> np.ndarray:
    """The discrete Klein-Gordon operator matching the stepper, applied
    slice-wise to a (S, T1, N) array; boundary slices are dropped (zeroed)."""
    dt2 = spacetime.dt ** 2
    g = np.asarray(f_values, dtype=complex)
    out = np.zeros_like(g)
    lap = (np.roll(g, -1, axis=-1) - 2 * g + np.roll(g, 1, axis=-1))
    m2 = np.asarray(spacetime.spectrum.species_masses)[:, None, None] ** 2
    interior = slice(1, g.shape[1] - 1)
    out[:, interior] = (
        (g[:, 2:] - 2 * g[:, 1:-1] + g[:, :-2]) / dt2
        - lap[:, interior] + m2 * g[:, interior]
    )
    return out


# -- pointwise null energy ---------------------------------------------------------

def null_derivatives(q_traj: np.ndarray, p_traj: np.ndarray):
    """Both null contractions (d_t +/- d_x) phi on every slice.

    Trajectories have shape (T1, ..., S, N); the spatial derivative is the
    symmetric difference. Returns (D_plus, D_minus).
    """
    dx = 0.5 * (np.roll(q_traj, -1, axis=-1) - np.roll(q_traj, 1, axis=-1))
    return p_traj + dx, p_traj - dx


def null_energy(sol: Solution, t: int, x: int, sign: int) -> float:
    """|| (d_t + sign * d_x) phi (t, x) ||^2 summed over species."""
    st = sol.spacetime
    if not (0 <= t <= st.n_steps):
        raise OutOfRange(f"slice {t} outside [0, {st.n_steps}]")
    q_traj, p_traj = trajectory(sol, t)
    dp, dm = null_derivatives(q_traj[-1][None], p_traj[-1][None])
    d = dp if sign > 0 else dm
    return float(np.sum(np.abs(d[0, :, x % st.n_sites]) ** 2))


def null_energy_grid(sol: Solution) -> np.ndarray:
    """Null energies at every (t, x, sign): shape (T1, N, 2), sign order (+, -)."""
    q_traj, p_traj = trajectory(sol)
    dp, dm = null_derivatives(q_traj, p_traj)
    out = np.stack([np.sum(np.abs(dp) ** 2, axis=-2),
                    np.sum(np.abs(dm) ** 2, axis=-2)], axis=-1)
    return out


# -- relative Cauchy evolution -----------------------------------------------------

def relative_cauchy_evolution(sol: Solution, pert: Perturbation) -> Solution:
    """Compare perturbed and unperturbed dynamics.

    The data (at t=0, in the past of supp v) is evolved forward with the
    perturbed equation to the final clean slice and brought back with the free
    equation: a linear symplectic automorphism, the identity when v = 0.
    """
    _same_spacetime(sol, pert)
    st = sol.spacetime
    T = st.n_steps
    q, p = evolve_data(sol.q, sol.p, st, 0, T, pert=pert)
    q, p = evolve_data(q, p, st, T, 0)
    return Solution(st, q, p)


def rce_matrix(pert: Perturbation) -> np.ndarray:
    """Dense matrix of rce[v] over the canonical basis."""
    st = pert.spacetime
    T = st.n_steps

    def act(qb, pb):
        qb, pb = evolve_data(qb, pb, st, 0, T, pert=pert)
        return evolve_data(qb, pb, st, T, 0)

    return matrix_of(act, st).real


def rce_derivative(pert: Perturbation, a: Solution, b: Solution) -> complex:
    """d/ds sigma(rce[s v] a, b) at s=0.

    Central differences over the step sequence (1e-2, 5e-3, 2.5e-3) with two
    levels of Richardson extrapolation. The resulting pairing is bilinear,
    symmetric under exchange of a and b (the derivative map is symplectically
    skew-adjoint), and weakly defines the derivative of the evolution family.
    """
    _same_spacetime(a, b)

    def f(s):
        return symplectic_form(relative_cauchy_evolution(a, pert.scaled(s)), b)

    centrals = []
    for s in RICHARDSON_STEPS:
        centrals.append((f(s) - f(-s)) / (2 * s))
    r1 = (4 * centrals[1] - centrals[0]) / 3
    r2 = (4 * centrals[2] - centrals[1]) / 3
    return (16 * r2 - r1) / 15


# -- scalar (single-species) data for sector constructions -------------------------

@dataclass(frozen=True, eq=False)
class ScalarData:
    """Cauchy data of a single scalar field, used to build species multiplets."""

    spacetime: LatticeSpacetime
    q: np.ndarray  # (N,) complex
    p: np.ndarray  # (N,) complex

    def __post_init__(self):
        N = self.spacetime.n_sites
        object.__setattr__(self, "q", _freeze(np.broadcast_to(self.q, (N,)).copy()))
        object.__setattr__(self, "p", _freeze(np.broadcast_to(self.p, (N,)).copy()))

    def charge(self) -> complex:
        """sigma(phi, 1) = -sum_x p(x): the Noether charge of the shift symmetry."""
        return -complex(np.sum(self.p))


def embed_scalar(phi: ScalarData, species: int) -> Solution:
    st = phi.spacetime
    q = np.zeros((st.n_species, st.n_sites), dtype=complex)
    p = np.zeros_like(q)
    q[species] = phi.q
    p[species] = phi.p
    return Solution(st, q, p)


def require_charge_zero(phi: ScalarData, tol: float = 1e-12):
    if abs(phi.charge()) > tol:
        raise NotChargeZero(
            f"sigma(phi, unit constant) = {phi.charge()} != 0"
        )
