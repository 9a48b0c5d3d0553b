"""Dense statevector kernels and a matrix-free ground-state solver.

Amplitudes are a flat complex array indexed by the computational basis
(qubit 0 = least significant bit).  Pauli word action never builds a
matrix: it is a gather along ``index ^ x_mask`` with a z-parity sign and
the Y phase ``i**|x&z|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliSum, PauliWord, to_dense_matrix

__all__ = [
    "Statevector",
    "GroundStateResult",
    "basis_state",
    "apply_pauli_word",
    "apply_pauli_exp",
    "expectation",
    "ground_state",
    "ground_state_dense",
    "MAX_QUBITS",
]

MAX_QUBITS = 16
_DEGENERACY_GAP = 1e-8
_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


class Statevector:
    __slots__ = ("amplitudes", "n_qubits")

    def __init__(self, amplitudes: np.ndarray, n_qubits: int):
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << n_qubits,):
            raise ValueError("amplitude count does not match qubit count")
        self.amplitudes = amplitudes
        self.n_qubits = n_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy(), self.n_qubits)

    def overlap(self, other: "Statevector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self) -> str:
        return f"Statevector(n_qubits={self.n_qubits})"


def basis_state(index: int, n_qubits: int) -> Statevector:
    if n_qubits > MAX_QUBITS:
        raise ValueError(f"limited to {MAX_QUBITS} qubits")
    dim = 1 << n_qubits
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[index] = 1.0
    return Statevector(amps, n_qubits)


def _word_action(amps: np.ndarray, x: int, z: int) -> np.ndarray:
    """P|psi> for the word (x, z), as a new array.

    (P psi)[j] = i**|x&z| * (-1)**|z & (j^x)| * psi[j^x]; the parity sign
    belongs to the source column, not the destination index.
    """
    cols = np.arange(amps.size) ^ x if x else np.arange(amps.size)
    src = amps[cols] if x else amps
    phase = _PHASES[(x & z).bit_count() % 4]
    if z:
        signs = 1.0 - 2.0 * (np.bitwise_count(cols & z) & 1)
        return phase * signs * src
    if phase != 1.0:
        return phase * src
    return src.copy() if src is amps else src


def apply_pauli_word(state: Statevector, word: PauliWord, coefficient: complex = 1.0) -> Statevector:
    """state <- coefficient * P |state>, in place."""
    if word.n_qubits != state.n_qubits:
        raise ValueError("qubit-count mismatch")
    out = _word_action(state.amplitudes, word.x_mask, word.z_mask)
    if coefficient != 1.0:
        out *= coefficient
    state.amplitudes = out
    return state


def apply_pauli_exp(state: Statevector, word: PauliWord, theta: float) -> Statevector:
    """state <- exp(-i theta P) |state> = cos(theta)|psi> - i sin(theta) P|psi>."""
    if word.n_qubits != state.n_qubits:
        raise ValueError("qubit-count mismatch")
    if theta == 0.0 or (word.x_mask == 0 and word.z_mask == 0):
        if word.x_mask == 0 and word.z_mask == 0 and theta != 0.0:
            state.amplitudes *= np.exp(-1j * theta)
        return state
    p_psi = _word_action(state.amplitudes, word.x_mask, word.z_mask)
    state.amplitudes = np.cos(theta) * state.amplitudes - 1j * np.sin(theta) * p_psi
    return state


def expectation(state: Statevector, h: PauliSum) -> float:
    """<psi|H|psi> for Hermitian H; the imaginary residue is asserted away."""
    if h.n_qubits != state.n_qubits:
        raise ValueError("qubit-count mismatch")
    if not h.is_hermitian():
        raise ValueError("expectation requires a Hermitian sum")
    amps = state.amplitudes
    total = 0.0 + 0.0j
    for word, coeff in h.terms():
        total += coeff * np.vdot(amps, _word_action(amps, word.x_mask, word.z_mask))
    assert abs(total.imag) < 1e-10, f"imaginary residue {total.imag}"
    return float(total.real)


@dataclass
class GroundStateResult:
    energy: float
    state: Statevector
    residual_norm: float
    iterations: int
    gap: float
    degenerate: bool


def _matvec_factory(h: PauliSum):
    # Precompute the per-term gather permutations and sign vectors once.
    dim = 1 << h.n_qubits
    idx = np.arange(dim)
    terms = []
    for word, coeff in h.terms():
        x, z = word.x_mask, word.z_mask
        scale = complex(coeff) * _PHASES[(x & z).bit_count() % 4]
        cols = idx ^ x
        signs = (1.0 - 2.0 * (np.bitwise_count(cols & z) & 1)) if z else None
        terms.append((cols if x else None, signs, scale))

    def matvec(v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        for perm, signs, scale in terms:
            contrib = v[perm] if perm is not None else v
            if signs is not None:
                out += scale * (signs * contrib)
            else:
                out += scale * contrib
        return out

    return matvec


def _lanczos_once(matvec, start: np.ndarray, tol: float, max_dim: int):
    """One Lanczos run with full reorthogonalization.

    Returns (energy, vector, ritz_values, n_matvecs).
    """
    from scipy.linalg import eigh_tridiagonal

    dim = start.size
    m_cap = min(dim, max_dim)
    basis = np.empty((m_cap, dim), dtype=np.complex128)
    alphas: list[float] = []
    betas: list[float] = []
    v = start / np.linalg.norm(start)
    basis[0] = v
    n_mv = 0
    for j in range(m_cap):
        w = matvec(basis[j])
        n_mv += 1
        alphas.append(float(np.vdot(basis[j], w).real))
        w -= alphas[j] * basis[j]
        if j > 0:
            w -= betas[j - 1] * basis[j - 1]
        # full reorthogonalization, twice for safety
        live = basis[: j + 1]
        for _ in range(2):
            w -= live.T @ (live.conj() @ w)
        b = float(np.linalg.norm(w))
        if j + 1 == m_cap or b < 1e-13:
            break
        betas.append(b)
        basis[j + 1] = w / b
    k = len(alphas)
    vals, vecs = eigh_tridiagonal(np.array(alphas), np.array(betas[: k - 1]))
    ground = (basis[:k].T @ vecs[:, 0].astype(np.complex128))
    ground /= np.linalg.norm(ground)
    return float(vals[0]), ground, vals, n_mv


def ground_state(
    h: PauliSum,
    tol: float = 1e-10,
    seed: int = 0,
    guess_index: int | None = None,
    max_lanczos_dim: int = 250,
    max_restarts: int = 3,
) -> GroundStateResult:
    """Lowest eigenpair by matrix-free Lanczos with full reorthogonalization.

    The start vector is seeded random noise, optionally mixed with a
    basis state (the mean-field determinant) to guarantee overlap with
    the physical sector.  Three restarts keep the best candidate; the
    result carries the true residual ``||H x - E x||``.
    """
    if not h.is_hermitian():
        raise ValueError("ground_state requires a Hermitian sum")
    if h.n_qubits > MAX_QUBITS:
        raise ValueError(f"limited to {MAX_QUBITS} qubits")
    dim = 1 << h.n_qubits
    matvec = _matvec_factory(h)
    rng = np.random.default_rng(seed)

    candidates = []
    iterations = 0
    for restart in range(max_restarts):
        start = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        if guess_index is not None:
            start /= np.linalg.norm(start)
            start[guess_index] += 2.0
        energy, vec, ritz, n_mv = _lanczos_once(matvec, start, tol, max_lanczos_dim)
        iterations += n_mv
        residual = float(np.linalg.norm(matvec(vec) - energy * vec))
        gap = float(ritz[1] - ritz[0]) if len(ritz) > 1 else np.inf
        candidates.append((energy, vec, residual, gap))
        # two converged runs are enough: the second also probes degeneracy
        if restart >= 1 and min(c[2] for c in candidates) < tol:
            break
    energy, vec, residual, gap = min(candidates, key=lambda c: c[0])
    if residual > max(tol, 1e-9) * max(1.0, abs(energy)) * 100:
        raise RuntimeError(
            f"Lanczos did not converge: residual {residual:.3e} after {iterations} matvecs"
        )
    # A degenerate ground space shows up either as a tiny Ritz gap or as
    # independent restarts landing on the same energy with different vectors.
    degenerate = gap < _DEGENERACY_GAP
    for other_energy, other_vec, other_residual, _ in candidates:
        if other_vec is vec or other_residual > 1e-6:
            continue
        if abs(other_energy - energy) < 1e-9:
            if abs(np.vdot(vec, other_vec)) < 1.0 - 1e-6:
                degenerate = True
    return GroundStateResult(
        energy=energy,
        state=Statevector(vec, h.n_qubits),
        residual_norm=residual,
        iterations=iterations,
        gap=gap,
        degenerate=degenerate,
    )


def ground_state_dense(h: PauliSum) -> GroundStateResult:
    """Cross-check path: full diagonalization of the dense matrix."""
    mat = to_dense_matrix(h)
    vals, vecs = np.linalg.eigh(mat)
    vec = vecs[:, 0]
    residual = float(np.linalg.norm(mat @ vec - vals[0] * vec))
    gap = float(vals[1] - vals[0]) if len(vals) > 1 else np.inf
    return GroundStateResult(
        energy=float(vals[0]),
        state=Statevector(vec, h.n_qubits),
        residual_norm=residual,
        iterations=1,
        gap=gap,
        degenerate=gap < _DEGENERACY_GAP,
    )
