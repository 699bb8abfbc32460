"""Truncated bosonic modes, discretized fields and their correlation functions.

Conventions fixed project-wide:
  * field operator phi(f) = (a(f) + a*(f)) / sqrt(2), a(f) antilinear in f;
  * on a discretized field with mode weights w_k and amplitudes u_k,
    a(u) = sum_k sqrt(w_k) conj(u_k) a_k, so [a(u), a*(v)] = <u, v>_w
    with <u, v>_w = sum_k w_k conj(u_k) v_k;
  * coherent amplitudes alpha_k satisfy a_k |alpha> = alpha_k |alpha>, hence
    the coupling-operator mean is mu(B(s)) = sqrt(2) Re sum_k sqrt(w_k)
    conj(g_k) alpha_k e^{-i omega_k s} (a sqrt(2)-smaller normalization than
    the "2 Re(e^{i omega s} alpha)" sometimes quoted for this model);
  * vacuum Weyl expectation mu(e^{i phi(f)}) = e^{-|f|_w^2 / 4}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConfigError, TruncationError
from .quadrature import gauss_nodes
from .tensor import OperatorMatrix, kron_all

TOP_LEVEL_POP_TOL = 1e-6   # run-invalidating occupation of the top two levels
WEYL_POP_TOL = 1e-8        # stricter bar for constructing a Weyl operator


@dataclass(frozen=True)
class FockMode:
    """A single truncated bosonic mode: occupations 0..cutoff, frequency omega.

    omega = 0 is allowed (zero-frequency ancilla oscillator).
    """

    cutoff: int
    omega: float = 1.0

    def __post_init__(self):
        if self.cutoff < 1:
            raise ConfigError("Fock cutoff must be >= 1")
        if self.omega < 0:
            raise ConfigError("mode frequency must be >= 0")

    @property
    def dim(self) -> int:
        return self.cutoff + 1


class FockOps(NamedTuple):
    a: OperatorMatrix
    adag: OperatorMatrix
    phi: OperatorMatrix
    number: OperatorMatrix
    h: OperatorMatrix


def fock_operators(mode: FockMode) -> FockOps:
    """Ladder, field, number and free-Hamiltonian matrices on the truncated mode."""
    d = mode.dim
    a = np.zeros((d, d), dtype=complex)
    for n in range(1, d):
        a[n - 1, n] = math.sqrt(n)
    adag = a.conj().T
    phi = (a + adag) / math.sqrt(2.0)
    number = np.diag(np.arange(d, dtype=float)).astype(complex)
    h = mode.omega * number
    return FockOps(
        OperatorMatrix(a),
        OperatorMatrix(adag),
        OperatorMatrix(phi, hermitian=True),
        OperatorMatrix(number, hermitian=True),
        OperatorMatrix(h, hermitian=True),
    )


def weyl(mode: FockMode, f: complex) -> OperatorMatrix:
    """Weyl operator e^{i phi(f)} on a single truncated mode.

    phi(f) = (conj(f) a + f a*) / sqrt(2).  Raises TruncationError when the
    displaced vacuum populates the top two Fock levels above 1e-8 (the
    truncated exponential is then not trustworthy).
    """
    ops = fock_operators(mode)
    gen = (np.conj(f) * ops.a.mat + f * ops.adag.mat) / math.sqrt(2.0)
    gen = OperatorMatrix(gen, hermitian=True)
    E, U = gen.eig()
    W = (U * np.exp(1j * E)) @ U.conj().T
    test = W[:, 0]  # displaced vacuum column
    pop = float(np.abs(test[-2:]) ** 2 @ np.ones(2))
    if pop > WEYL_POP_TOL:
        raise TruncationError(
            f"weyl displacement |f| = {abs(f):.3g} populates the top two Fock "
            f"levels at {pop:.2e} > {WEYL_POP_TOL}; raise the cutoff"
        )
    unit_err = np.abs(W @ W.conj().T - np.eye(mode.dim)).max()
    if unit_err > 1e-8:
        raise TruncationError(f"weyl operator unitary only to {unit_err:.2e}")
    return OperatorMatrix(W)


# ---------------------------------------------------------------------------
# discretized fields


@dataclass(frozen=True)
class DiscretizedField:
    """Quadrature discretization of a continuous bosonic field.

    omegas[k] > 0 are mode frequencies, amps[k] the complex form-factor
    values g(omega_k), weights[k] the quadrature weights, so that
    sum_k weights[k] |amps[k]|^2 approximates the squared form-factor norm.
    """

    omegas: tuple
    amps: tuple
    weights: tuple

    def __post_init__(self):
        if not (len(self.omegas) == len(self.amps) == len(self.weights)):
            raise ConfigError("field mode arrays must have equal length")
        if len(self.omegas) == 0:
            raise ConfigError("field needs at least one mode")
        if any(w <= 0 for w in self.weights):
            raise ConfigError("quadrature weights must be positive")

    @staticmethod
    def from_modes(omegas, amps=None, weights=None) -> "DiscretizedField":
        omegas = tuple(float(w) for w in omegas)
        if amps is None:
            amps = (1.0,) * len(omegas)
        if weights is None:
            weights = (1.0,) * len(omegas)
        return DiscretizedField(
            omegas, tuple(complex(g) for g in amps), tuple(float(w) for w in weights)
        )

    @property
    def n_modes(self) -> int:
        return len(self.omegas)

    @cached_property
    def omega_arr(self):
        return np.array(self.omegas, dtype=float)

    @cached_property
    def amp_arr(self):
        return np.array(self.amps, dtype=complex)

    @cached_property
    def weight_arr(self):
        return np.array(self.weights, dtype=float)

    def coupling_norm_sq(self) -> float:
        """|g|_w^2 = sum_k w_k |g_k|^2."""
        return float(self.weight_arr @ np.abs(self.amp_arr) ** 2)

    def inner(self, u, v) -> complex:
        """Weighted inner product <u, v>_w, antilinear in u."""
        u = np.asarray(u, dtype=complex)
        v = np.asarray(v, dtype=complex)
        return complex(np.sum(self.weight_arr * np.conj(u) * v))


def discretize_radial(density: Callable[[np.ndarray], np.ndarray],
                      omega_max: float, K: int) -> DiscretizedField:
    """Gauss-Legendre discretization of a radial spectral density on [0, omega_max].

    ``density(omega)`` is the effective radial weight |g|^2-measure (any
    angular factors already absorbed by the caller); the returned field has
    amps[k] = sqrt(density(omega_k)) and the Gauss weights.
    """
    if K < 2:
        raise ConfigError("need at least K = 2 quadrature modes")
    if omega_max <= 0:
        raise ConfigError("omega_max must be positive")
    x, w = gauss_nodes(K)
    omegas = omega_max * (x + 1.0) / 2.0
    weights = w * omega_max / 2.0
    rho = np.asarray(density(omegas), dtype=float)
    if not np.all(np.isfinite(rho)) or np.any(rho < 0):
        raise ConfigError("spectral density must be finite and nonnegative on the grid")
    return DiscretizedField(tuple(omegas), tuple(np.sqrt(rho).astype(complex)), tuple(weights))


# ---------------------------------------------------------------------------
# correlation functions


def _bose_occupation(beta: float | None, omegas: np.ndarray) -> np.ndarray:
    if beta is None:
        return np.zeros_like(omegas)
    return 1.0 / np.expm1(beta * omegas)


class CorrelationFunction:
    """Two-point function C(s, s') = mu(B(s) B(s')) of a Gaussian field state.

    Also evaluates cross two-point functions between arbitrary smeared field
    operators of the same field (``pair``), and the coupling-operator mean
    for coherent displacements (``mean``).
    """

    def __init__(self, field: DiscretizedField, label: str,
                 beta: float | None = None, alphas=None):
        self.field = field
        self.label = label
        self.beta = beta
        self.alphas = None if alphas is None else np.asarray(alphas, dtype=complex)
        self._occ = _bose_occupation(beta, field.omega_arr)

    def __call__(self, s, sp):
        """C(s, s') for scalars or broadcastable arrays of times."""
        return self.pair(self.field.amp_arr, self.field.amp_arr, s, sp)

    def pair(self, u, v, su, sv):
        """mu(phi(e^{i omega su} u) phi(e^{i omega sv} v)), centered part.

        Vectorized over times: su, sv may be arrays of equal shape.
        """
        su = np.asarray(su, dtype=float)
        sv = np.asarray(sv, dtype=float)
        tau = su[..., None] - sv[..., None]
        w = self.field.weight_arr
        occ = self._occ
        u = np.asarray(u, dtype=complex)
        v = np.asarray(v, dtype=complex)
        fwd = np.conj(u) * v * w          # pairs a(u) a*(v)
        bwd = u * np.conj(v) * w          # pairs a*(u) a(v)
        om = self.field.omega_arr
        val = 0.5 * (
            (fwd * (1.0 + occ)) @ np.ones_like(om) * 0.0  # placeholder, replaced below
        )
        val = 0.5 * np.sum(
            fwd * (1.0 + occ) * np.exp(-1j * om * tau)
            + bwd * occ * np.exp(1j * om * tau),
            axis=-1,
        )
        if val.shape == ():
            return complex(val)
        return val

    def mean(self, s):
        """mu(B(s)); nonzero only for coherent displacements."""
        s = np.asarray(s, dtype=float)
        if self.alphas is None:
            return np.zeros(s.shape, dtype=float) if s.shape else 0.0
        w = self.field.weight_arr
        g = self.field.amp_arr
        om = self.field.omega_arr
        z = np.sum(
            np.sqrt(w) * np.conj(g) * self.alphas * np.exp(-1j * om * s[..., None]),
            axis=-1,
        )
        out = math.sqrt(2.0) * np.real(z)
        if out.shape == ():
            return float(out)
        return out

    def max_abs(self, t: float) -> float:
        """max over [0,t]^2 of |C|; attained at equal times for these states."""
        w = self.field.weight_arr
        g2 = np.abs(self.field.amp_arr) ** 2
        return float(0.5 * np.sum(w * g2 * (1.0 + 2.0 * self._occ)))

    @property
    def gauge_invariant(self) -> bool:
        return self.alphas is None or not np.any(self.alphas)


def correlation_vacuum(field: DiscretizedField) -> CorrelationFunction:
    """Vacuum two-point function: C(s,s') = (1/2) sum_k w_k |g_k|^2 e^{-i omega_k (s-s')}."""
    return CorrelationFunction(field, "vacuum")


def correlation_thermal(field: DiscretizedField, beta: float) -> CorrelationFunction:
    """Thermal two-point function at inverse temperature beta > 0.

    Per mode: (1/2) w |g|^2 [coth(beta omega/2) cos(omega tau) - i sin(omega tau)].
    """
    if beta <= 0:
        raise ConfigError("inverse temperature must be positive")
    return CorrelationFunction(field, f"thermal(beta={beta})", beta=beta)


# ---------------------------------------------------------------------------
# assembled truncated reservoirs


@dataclass(frozen=True)
class ReservoirState:
    """vacuum | thermal(beta) | coherent(alphas)."""

    kind: str = "vacuum"
    beta: float | None = None
    alphas: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("vacuum", "thermal", "coherent"):
            raise ConfigError(f"unknown reservoir state kind {self.kind!r}")
        if self.kind == "thermal" and (self.beta is None or self.beta <= 0):
            raise ConfigError("thermal state needs beta > 0")
        if self.kind == "coherent" and self.alphas is None:
            raise ConfigError("coherent state needs per-mode amplitudes")


class Reservoir:
    """A discretized field realized on a truncated multi-mode Fock space.

    The same physics is exposed two ways: dense matrices (H_r, B, number,
    density matrix) for exact propagation, and the analytic
    CorrelationFunction for pairing-based paths.  Tests pin the two
    representations against each other.
    """

    def __init__(self, field: DiscretizedField, cutoffs, state: ReservoirState | None = None):
        if isinstance(cutoffs, int):
            cutoffs = (cutoffs,) * field.n_modes
        cutoffs = tuple(int(c) for c in cutoffs)
        if len(cutoffs) != field.n_modes:
            raise ConfigError("need one cutoff per mode")
        self.field = field
        self.cutoffs = cutoffs
        self.state = state or ReservoirState()
        self.modes = tuple(
            FockMode(c, w) for c, w in zip(cutoffs, field.omegas)
        )
        self._ops = [fock_operators(m) for m in self.modes]

    @property
    def dim(self) -> int:
        return int(np.prod([m.dim for m in self.modes]))

    @property
    def dims(self):
        return tuple(m.dim for m in self.modes)

    @cached_property
    def energies(self) -> np.ndarray:
        """Diagonal of H_r in the product Fock basis."""
        e = np.zeros(1)
        for m in self.modes:
            e = (e[:, None] + m.omega * np.arange(m.dim)[None, :]).ravel()
        return e

    @cached_property
    def h_matrix(self) -> OperatorMatrix:
        return OperatorMatrix(np.diag(self.energies).astype(complex), self.dims, hermitian=True)

    @cached_property
    def number_matrix(self) -> OperatorMatrix:
        n = np.zeros(1)
        for m in self.modes:
            n = (n[:, None] + np.arange(m.dim)[None, :]).ravel()
        return OperatorMatrix(np.diag(n).astype(complex), self.dims, hermitian=True)

    def smeared_field(self, u) -> OperatorMatrix:
        """phi(u) = sum_k sqrt(w_k) (conj(u_k) a_k + u_k a_k*) / sqrt(2)."""
        u = np.asarray(u, dtype=complex)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for k, ops in enumerate(self._ops):
            coeff = math.sqrt(self.field.weights[k])
            one = (np.conj(u[k]) * ops.a.mat + u[k] * ops.adag.mat) / math.sqrt(2.0)
            out = out + self._embed(one, k)
        return OperatorMatrix(out, self.dims, hermitian=True)

    @cached_property
    def b_matrix(self) -> OperatorMatrix:
        """The coupling operator B = phi(g)."""
        return self.smeared_field(self.field.amp_arr)

    def weyl_matrix(self, u) -> OperatorMatrix:
        """W(u) = e^{i phi(u)} on the truncated product space."""
        gen = self.smeared_field(u)
        E, U = gen.eig()
        return OperatorMatrix((U * np.exp(1j * E)) @ U.conj().T, self.dims)

    def _embed(self, mat_k: np.ndarray, k: int) -> np.ndarray:
        left = int(np.prod([m.dim for m in self.modes[:k]])) if k else 1
        right = int(np.prod([m.dim for m in self.modes[k + 1:]])) if k + 1 < len(self.modes) else 1
        return np.kron(np.kron(np.eye(left), mat_k), np.eye(right))

    # -- states -----------------------------------------------------------
    @cached_property
    def rho(self) -> OperatorMatrix:
        kind = self.state.kind
        if kind == "vacuum":
            r = np.zeros((self.dim, self.dim), dtype=complex)
            r[0, 0] = 1.0
            return OperatorMatrix(r, self.dims, density=True)
        if kind == "thermal":
            w = np.exp(-self.state.beta * self.energies)
            w /= w.sum()
            return OperatorMatrix(np.diag(w).astype(complex), self.dims, density=True)
        vec = self.coherent_vector(self.state.alphas)
        return OperatorMatrix(np.outer(vec, vec.conj()), self.dims, density=True)

    def coherent_vector(self, alphas) -> np.ndarray:
        alphas = np.asarray(alphas, dtype=complex)
        if alphas.shape != (len(self.modes),):
            raise ConfigError("need one coherent amplitude per mode")
        vec = np.array([1.0 + 0j])
        for m, al in zip(self.modes, alphas):
            n = np.arange(m.dim)
            amp = np.exp(-0.5 * abs(al) ** 2) * al ** n / np.sqrt(
                np.array([math.factorial(int(k)) for k in n], dtype=float)
            )
            vec = np.kron(vec, amp)
        top_pop = self._top_two_population(np.abs(vec) ** 2)
        if top_pop > TOP_LEVEL_POP_TOL:
            raise TruncationError(
                f"coherent amplitudes populate top Fock levels at {top_pop:.2e}"
            )
        return vec

    def state_decomposition(self, weight_floor: float = 1e-16):
        """The density matrix as a list of (weight, vector) pure pieces.

        Vacuum and coherent give a single vector; thermal gives the product
        Fock basis states above the weight floor.
        """
        kind = self.state.kind
        if kind == "vacuum":
            v = np.zeros(self.dim, dtype=complex)
            v[0] = 1.0
            return [(1.0, v)]
        if kind == "coherent":
            return [(1.0, self.coherent_vector(self.state.alphas))]
        w = np.exp(-self.state.beta * self.energies)
        w /= w.sum()
        out = []
        for idx in np.argsort(w)[::-1]:
            if w[idx] < weight_floor:
                break
            v = np.zeros(self.dim, dtype=complex)
            v[idx] = 1.0
            out.append((float(w[idx]), v))
        return out

    def top_two_population(self, rho_diag_or_vec) -> float:
        arr = np.asarray(rho_diag_or_vec)
        if np.iscomplexobj(arr):
            arr = np.abs(arr) ** 2
        return self._top_two_population(arr)

    def _top_two_population(self, probs: np.ndarray) -> float:
        """Total probability of the top two occupation levels of any mode."""
        shaped = probs.reshape(self.dims)
        total = 0.0
        for k, m in enumerate(self.modes):
            sl = [slice(None)] * len(self.modes)
            sl[k] = slice(m.dim - 2, m.dim)
            total += float(shaped[tuple(sl)].sum())
        return total

    @cached_property
    def top_projector(self) -> OperatorMatrix:
        """Projector onto states with any mode in its top two levels."""
        mask = np.zeros(self.dims, dtype=float)
        for k, m in enumerate(self.modes):
            sl = [slice(None)] * len(self.modes)
            sl[k] = slice(m.dim - 2, m.dim)
            mask[tuple(sl)] = 1.0
        return OperatorMatrix(np.diag(mask.ravel()).astype(complex), self.dims, hermitian=True)

    # -- analytic side ----------------------------------------------------
    def correlation(self) -> CorrelationFunction:
        kind = self.state.kind
        if kind == "vacuum":
            return correlation_vacuum(self.field)
        if kind == "thermal":
            return correlation_thermal(self.field, self.state.beta)
        return CorrelationFunction(
            self.field, "coherent-shifted", alphas=self.state.alphas
        )

    @property
    def max_particles(self) -> int | None:
        """Largest particle number carried by the state (None if unbounded)."""
        return 0 if self.state.kind == "vacuum" else None
