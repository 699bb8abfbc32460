"""Dense complex linear algebra on small tensor-product Hilbert spaces.

Operators carry their factor dimensions so they can be embedded, evolved and
traced against product states without the caller juggling Kronecker
bookkeeping.  Everything is dense; the intended scale is total dimension
up to a few thousand.
"""

from __future__ import annotations

import threading

import numpy as np

HERMITIAN_TOL = 1e-12
DENSITY_TRACE_TOL = 1e-12
DENSITY_EIG_TOL = 1e-10


class OperatorMatrix:
    """A dense complex matrix on an ordered tensor product of factors.

    Parameters
    ----------
    mat : array_like, shape (D, D) with D = prod(dims)
    dims : factor dimensions; defaults to a single factor of size D.
    hermitian : validate and flag self-adjointness (max|M - M^dag| <= 1e-12).
    density : validate trace == 1 and spectrum >= -1e-10 (implies hermitian).
    """

    __slots__ = ("mat", "dims", "hermitian", "density", "_eig", "_eig_lock")

    def __init__(self, mat, dims=None, *, hermitian=False, density=False):
        mat = np.array(mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator must be square, got shape {mat.shape}")
        if dims is None:
            dims = (mat.shape[0],)
        dims = tuple(int(d) for d in dims)
        if any(d < 1 for d in dims):
            raise ValueError(f"factor dimensions must be positive, got {dims}")
        if int(np.prod(dims)) != mat.shape[0]:
            raise ValueError(
                f"dims {dims} give total {int(np.prod(dims))}, matrix is {mat.shape[0]}"
            )
        if density:
            hermitian = True
        if hermitian:
            herm_err = np.abs(mat - mat.conj().T).max()
            if herm_err > HERMITIAN_TOL:
                raise ValueError(f"matrix flagged hermitian but |M - M^dag| = {herm_err:.3e}")
            mat = 0.5 * (mat + mat.conj().T)
        if density:
            tr = np.trace(mat)
            if abs(tr - 1.0) > DENSITY_TRACE_TOL:
                raise ValueError(f"density matrix trace {tr} != 1")
            lo = np.linalg.eigvalsh(mat).min()
            if lo < -DENSITY_EIG_TOL:
                raise ValueError(f"density matrix has eigenvalue {lo:.3e} < 0")
        mat.setflags(write=False)
        self.mat = mat
        self.dims = dims
        self.hermitian = bool(hermitian)
        self.density = bool(density)
        self._eig = None
        self._eig_lock = threading.Lock()

    # -- basic queries ----------------------------------------------------
    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.mat.conj().T, self.dims, hermitian=self.hermitian)

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.mat))

    def opnorm(self) -> float:
        """Spectral norm (largest singular value; |eigenvalue| if hermitian)."""
        if self.hermitian:
            return float(np.abs(np.linalg.eigvalsh(self.mat)).max())
        return float(np.linalg.norm(self.mat, 2))

    def eig(self):
        """Cached eigendecomposition (E, U) of a hermitian operator.

        Safe for concurrent readers; a lock serializes the single writer.
        """
        if not self.hermitian:
            raise ValueError("eigendecomposition cache only for hermitian operators")
        if self._eig is None:
            with self._eig_lock:
                if self._eig is None:
                    E, U = np.linalg.eigh(self.mat)
                    self._eig = (E, U)
        return self._eig

    # -- arithmetic (results drop the hermitian/density flags) ------------
    def __matmul__(self, other):
        return OperatorMatrix(self.mat @ _raw(other), self.dims)

    def __rmatmul__(self, other):
        return OperatorMatrix(_raw(other) @ self.mat, self.dims)

    def __add__(self, other):
        return OperatorMatrix(self.mat + _raw(other), self.dims)

    __radd__ = __add__

    def __sub__(self, other):
        return OperatorMatrix(self.mat - _raw(other), self.dims)

    def __mul__(self, scalar):
        return OperatorMatrix(self.mat * scalar, self.dims)

    __rmul__ = __mul__

    def __neg__(self):
        return OperatorMatrix(-self.mat, self.dims)

    def __repr__(self):
        return f"OperatorMatrix(dims={self.dims}, dim={self.dim})"


def _raw(x):
    return x.mat if isinstance(x, OperatorMatrix) else np.asarray(x, dtype=complex)


class ProductState:
    """Ordered tensor product of per-factor density matrices."""

    def __init__(self, factors):
        self.factors = tuple(
            f if isinstance(f, OperatorMatrix) else OperatorMatrix(f, density=True)
            for f in factors
        )
        for f in self.factors:
            if len(f.dims) != 1:
                raise ValueError("product-state factors must be single-factor operators")
            if not f.density:
                raise ValueError("product-state factors must be flagged density")

    @property
    def dims(self):
        return tuple(f.dims[0] for f in self.factors)

    def full_matrix(self) -> OperatorMatrix:
        out = np.array([[1.0 + 0j]])
        for f in self.factors:
            out = np.kron(out, f.mat)
        return OperatorMatrix(out, self.dims, density=True)


# ---------------------------------------------------------------------------
# operations


def embed(op: OperatorMatrix, slot: int, dims) -> OperatorMatrix:
    """I x ... x op x ... x I with ``op`` on factor ``slot`` of ``dims``."""
    dims = tuple(int(d) for d in dims)
    if not 0 <= slot < len(dims):
        raise IndexError(f"slot {slot} out of range for {len(dims)} factors")
    op_mat = _raw(op)
    if op_mat.shape[0] != dims[slot]:
        raise ValueError(f"operator dim {op_mat.shape[0]} != dims[{slot}] = {dims[slot]}")
    left = int(np.prod(dims[:slot])) if slot else 1
    right = int(np.prod(dims[slot + 1:])) if slot + 1 < len(dims) else 1
    out = np.kron(np.kron(np.eye(left), op_mat), np.eye(right))
    herm = op.hermitian if isinstance(op, OperatorMatrix) else False
    return OperatorMatrix(out, dims, hermitian=herm)


def heisenberg(H: OperatorMatrix, A: OperatorMatrix, t: float) -> OperatorMatrix:
    """e^{itH} A e^{-itH} via the cached eigendecomposition of hermitian H."""
    if H.dims != A.dims:
        raise ValueError(f"dimension mismatch: H {H.dims} vs A {A.dims}")
    E, U = H.eig()
    At = U.conj().T @ A.mat @ U
    At = At * np.exp(1j * t * (E[:, None] - E[None, :]))
    out = U @ At @ U.conj().T
    return OperatorMatrix(out, A.dims, hermitian=A.hermitian)


def expectation(state: ProductState, A: OperatorMatrix) -> complex:
    """Tr((rho_1 x ... x rho_k) A), contracted factor by factor."""
    dims = state.dims
    if A.dims != dims:
        raise ValueError(f"dimension mismatch: state {dims} vs A {A.dims}")
    k = len(dims)
    # reshape A to a 2k-leg tensor and close each (bra, ket) pair with rho^T
    T = A.mat.reshape(dims + dims)
    for f in reversed(state.factors):
        d = f.dims[0]
        nleg = T.ndim
        # contract the last ket leg with the last bra leg through rho:
        # Tr(rho A) over one factor = sum_{ab} rho[a,b] A[..b.., ..a..]
        T = np.tensordot(T, f.mat, axes=([nleg // 2 - 1, nleg - 1], [1, 0]))
    return complex(T)


def partial_trace(A: OperatorMatrix, keep) -> OperatorMatrix:
    """Trace out every factor not in ``keep`` (a set of slot indices)."""
    keep = sorted(set(int(s) for s in keep))
    dims = A.dims
    k = len(dims)
    if any(not 0 <= s < k for s in keep):
        raise IndexError(f"keep {keep} out of range for {k} factors")
    if not keep:
        return OperatorMatrix(np.array([[np.trace(A.mat)]]), (1,))
    T = A.mat.reshape(dims + dims)
    traced = [s for s in range(k) if s not in keep]
    for off, s in enumerate(traced):
        # legs shift left as we trace factors out
        s_eff = s - off
        T = np.trace(T, axis1=s_eff, axis2=s_eff + T.ndim // 2)
    d_keep = tuple(dims[s] for s in keep)
    D = int(np.prod(d_keep))
    return OperatorMatrix(T.reshape(D, D), d_keep, hermitian=A.hermitian)


def commutator(A: OperatorMatrix, B: OperatorMatrix) -> OperatorMatrix:
    return OperatorMatrix(A.mat @ B.mat - B.mat @ A.mat, A.dims)


def kron_all(ops) -> OperatorMatrix:
    out = np.array([[1.0 + 0j]])
    dims = ()
    herm = True
    for op in ops:
        out = np.kron(out, _raw(op))
        dims = dims + (op.dims if isinstance(op, OperatorMatrix) else (op.shape[0],))
        herm = herm and isinstance(op, OperatorMatrix) and op.hermitian
    return OperatorMatrix(out, dims, hermitian=herm)


# ---------------------------------------------------------------------------
# named presets (used by configs and tests)

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def sigma_x() -> OperatorMatrix:
    return OperatorMatrix(SIGMA_X, hermitian=True)


def sigma_y() -> OperatorMatrix:
    return OperatorMatrix(SIGMA_Y, hermitian=True)


def sigma_z() -> OperatorMatrix:
    return OperatorMatrix(SIGMA_Z, hermitian=True)


def identity(d: int) -> OperatorMatrix:
    return OperatorMatrix(np.eye(d), hermitian=True)


def maximally_mixed(d: int) -> OperatorMatrix:
    return OperatorMatrix(np.eye(d) / d, density=True)


def gibbs_state(h: OperatorMatrix, beta: float) -> OperatorMatrix:
    """exp(-beta h)/Z as a density matrix."""
    E, U = np.linalg.eigh(_raw(h))
    w = np.exp(-beta * (E - E.min()))
    w /= w.sum()
    rho = (U * w) @ U.conj().T
    return OperatorMatrix(rho, h.dims if isinstance(h, OperatorMatrix) else None, density=True)


def ladder_coupling(d: int, gammas=None) -> OperatorMatrix:
    """Tridiagonal single-step excitation/de-excitation operator on a d-level system.

    Off-diagonal entries gamma_1..gamma_{d-1} (default all 1).  For d = 2 this
    is the spin-flip Pauli matrix.
    """
    if gammas is None:
        gammas = np.ones(d - 1)
    gammas = np.asarray(gammas, dtype=complex)
    if gammas.shape != (d - 1,):
        raise ValueError(f"need {d - 1} off-diagonal entries, got {gammas.shape}")
    G = np.zeros((d, d), dtype=complex)
    for i, g in enumerate(gammas):
        G[i, i + 1] = g
        G[i + 1, i] = np.conj(g)
    return OperatorMatrix(G, hermitian=True)
