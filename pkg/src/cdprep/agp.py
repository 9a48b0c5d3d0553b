"""Variational adiabatic gauge potential from nested commutators.

The interpolation H(lam) = h_one + lam * h_two is steered by an extra
counter-diabatic term lam_dot * A(lam).  A(lam) is expanded in the odd
nested commutators

    O_k = i [H, [H, ... [H, dH] ... ]]        (2k-1 nestings, dH = h_two)

and the expansion coefficients alpha_k minimize the action
S = Tr[G(alpha)^2] / 2^n with G = dH - sum_k alpha_k i[H, O_k].  The
minimum of the quadratic is the solution of the Gram system
M alpha = b, assembled here through Pauli-orthogonality traces; dense
matrices never appear outside diagnostics.

The classic avoided crossing H = delta X + lam Z is wired in as a
closed-form regression problem: order 1 already reproduces the exact
gauge potential there, which pins both the sign and the magnitude of
alpha_1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fermion import AdiabaticSplit
from .pauli import (
    PauliSum,
    PauliWord,
    commutator,
    simplify,
    to_dense_matrix,
    trace_inner_product,
)

__all__ = [
    "MAX_ORDER",
    "SchedulePoint",
    "AgpExpansion",
    "ActionProblem",
    "schedule_at",
    "hamiltonian_at",
    "nested_basis",
    "build_action_problem",
    "minimize_action",
    "cd_hamiltonian",
    "aga_pool",
    "gauge_residual",
    "offdiagonal_residual_action",
    "two_level_split",
]

MAX_ORDER = 3


@dataclass(frozen=True)
class SchedulePoint:
    """One point of the interpolation schedule lam(t) = sin^2(pi t / 2T)."""

    t: float
    total_time: float
    lam: float
    lam_dot: float


def schedule_at(t: float, total_time: float) -> SchedulePoint:
    if total_time <= 0:
        raise ValueError("total time must be positive")
    if not 0 <= t <= total_time:
        raise ValueError(f"t={t} outside [0, {total_time}]")
    if t == 0.0:
        # both endpoints are exact by construction; sin(pi) rounding noise
        # would otherwise leak a spurious gauge term into the products
        return SchedulePoint(t=t, total_time=total_time, lam=0.0, lam_dot=0.0)
    if t == total_time:
        return SchedulePoint(t=t, total_time=total_time, lam=1.0, lam_dot=0.0)
    half_phase = math.pi * t / (2.0 * total_time)
    lam = math.sin(half_phase) ** 2
    lam_dot = math.pi / (2.0 * total_time) * math.sin(math.pi * t / total_time)
    return SchedulePoint(t=t, total_time=total_time, lam=lam, lam_dot=lam_dot)


def hamiltonian_at(split: AdiabaticSplit, lam: float) -> PauliSum:
    """h_one + lam * h_two; its lam-derivative is the constant h_two."""
    return split.h_one + lam * split.h_two


def _first_basis_element(split: AdiabaticSplit) -> PauliSum:
    # i[H(lam), dH] = i[h_one, h_two]: independent of lam, cache on the split
    cached = getattr(split, "_agp_first_basis", None)
    if cached is None:
        cached = simplify(1j * commutator(split.h_one, split.h_two))
        setattr(split, "_agp_first_basis", cached)
    return cached


def nested_basis(split: AdiabaticSplit, lam: float, l: int) -> list[PauliSum]:
    """O_1..O_l, each Hermitian; O_{k+1} reuses O_k (two more commutators)."""
    if l < 1:
        raise ValueError("expansion order must be at least 1")
    basis = [_first_basis_element(split)]
    if l == 1:
        return basis
    h_lam = hamiltonian_at(split, lam)
    for _ in range(l - 1):
        basis.append(simplify(commutator(h_lam, commutator(h_lam, basis[-1]))))
    return basis


@dataclass
class ActionProblem:
    """Quadratic action data: S(alpha) = S0 - 2 b.alpha + alpha.M.alpha."""

    gram: np.ndarray
    rhs: np.ndarray
    c_basis: list[PauliSum] = field(default_factory=list)
    constant: float = 0.0


def build_action_problem(
    h_lam: PauliSum, dh: PauliSum, basis: list[PauliSum]
) -> ActionProblem:
    c_basis = [simplify(1j * commutator(h_lam, o_k)) for o_k in basis]
    l = len(basis)
    gram = np.zeros((l, l))
    rhs = np.zeros(l)
    for j in range(l):
        rhs[j] = trace_inner_product(c_basis[j], dh).real
        for k in range(j, l):
            entry = trace_inner_product(c_basis[j], c_basis[k]).real
            gram[j, k] = gram[k, j] = entry
    constant = trace_inner_product(dh, dh).real
    return ActionProblem(gram=gram, rhs=rhs, c_basis=c_basis, constant=constant)


@dataclass
class AgpExpansion:
    """Variational gauge potential A = sum_k alphas[k] * basis[k]."""

    order: int
    basis: list[PauliSum]
    alphas: np.ndarray
    lambda_at: float
    residual_action: float
    singular: bool = False
    condition: float = 1.0

    def assemble(self) -> PauliSum:
        n = self.basis[0].n_qubits if self.basis else 0
        total = PauliSum(n)
        for alpha, o_k in zip(self.alphas, self.basis):
            if alpha != 0.0:
                total = total + float(alpha) * o_k
        return simplify(total)


def _solve_quadratic(problem: ActionProblem) -> tuple[np.ndarray, bool, float]:
    gram, rhs = problem.gram, problem.rhs
    # rank-revealing least squares; nested bases recur in small systems
    # and make the Gram matrix singular by construction
    alphas, _, rank, sv = np.linalg.lstsq(gram, rhs, rcond=1e-10)
    singular = rank < len(rhs)
    if sv.size and sv[-1] > 0:
        condition = float(sv[0] / sv[-1])
    else:
        condition = float("inf")
    return alphas, singular, condition


def _order1_cache(split: AdiabaticSplit) -> dict:
    cache = getattr(split, "_agp_order1", None)
    if cache is None:
        o1 = _first_basis_element(split)
        c_a = simplify(1j * commutator(split.h_one, o1))
        c_b = simplify(1j * commutator(split.h_two, o1))
        cache = {
            "o1": o1,
            "c_a": c_a,
            "c_b": c_b,
            # Tr[C1(lam)^2]/2^n and Tr[C1(lam) dH]/2^n as polynomials in lam
            "m": (
                trace_inner_product(c_a, c_a).real,
                2.0 * trace_inner_product(c_a, c_b).real,
                trace_inner_product(c_b, c_b).real,
            ),
            "b": (
                trace_inner_product(c_a, split.h_two).real,
                trace_inner_product(c_b, split.h_two).real,
            ),
            "s0": trace_inner_product(split.h_two, split.h_two).real,
        }
        setattr(split, "_agp_order1", cache)
    return cache


def minimize_action(split: AdiabaticSplit, lam: float, l: int) -> AgpExpansion:
    """Coefficients of the order-l gauge potential at interpolation lam.

    The order-1 case is solved from cached lam-polynomials of the traces
    (exact, no interpolation); higher orders rebuild the nested basis at
    the requested lam.
    """
    if l < 1:
        raise ValueError("expansion order must be at least 1")
    if l > MAX_ORDER:
        raise ValueError(f"expansion order {l} exceeds maximum {MAX_ORDER}")

    if l == 1:
        cache = _order1_cache(split)
        m0, m1, m2 = cache["m"]
        b0, b1 = cache["b"]
        m_val = m0 + lam * (m1 + lam * m2)
        b_val = b0 + lam * b1
        if m_val > 1e-30:
            alpha = b_val / m_val
            singular, condition = False, 1.0
        else:
            alpha, singular, condition = 0.0, True, float("inf")
        residual = cache["s0"] - 2.0 * b_val * alpha + m_val * alpha * alpha
        return AgpExpansion(
            order=1,
            basis=[cache["o1"]],
            alphas=np.array([alpha]),
            lambda_at=lam,
            residual_action=float(residual),
            singular=singular,
            condition=condition,
        )

    basis = nested_basis(split, lam, l)
    h_lam = hamiltonian_at(split, lam)
    problem = build_action_problem(h_lam, split.h_two, basis)
    alphas, singular, condition = _solve_quadratic(problem)
    residual = (
        problem.constant
        - 2.0 * float(problem.rhs @ alphas)
        + float(alphas @ problem.gram @ alphas)
    )
    return AgpExpansion(
        order=l,
        basis=basis,
        alphas=alphas,
        lambda_at=lam,
        residual_action=float(residual),
        singular=singular,
        condition=condition,
    )


def cd_hamiltonian(
    split: AdiabaticSplit, point: SchedulePoint, l: int
) -> PauliSum:
    """lam_dot * A(lam); empty at the schedule endpoints where lam_dot = 0."""
    if point.lam_dot == 0.0:
        return PauliSum(split.n_qubits)
    expansion = minimize_action(split, point.lam, l)
    return simplify(point.lam_dot * expansion.assemble())


def conserved_z_mask(split: AdiabaticSplit) -> int:
    """Bitmask of qubits the full Hamiltonian acts on with I and Z alone.

    Z on such a qubit commutes with every Hamiltonian term, so its
    eigenvalue is a constant of motion for any evolution or circuit built
    from the Hamiltonian's commutator algebra.
    """
    x_union = 0
    for word, _ in split.full().terms():
        x_union |= word.x_mask
    return ((1 << split.n_qubits) - 1) & ~x_union


def aga_pool(
    split: AdiabaticSplit, l: int, reference_lambda: float = 0.5
) -> list[PauliWord]:
    """Deterministically ordered words appearing in O_1..O_l.

    These become the generators of the gauge-ansatz circuits.  Words from
    lower orders come first, so the order-l pool extends the order-(l-1)
    pool.

    Words that differ only by Z factors on sector qubits (see
    :func:`conserved_z_mask`) are merged.  On any state of definite sector
    parity, such words act identically up to a sign the variational
    parameter absorbs, so keeping more than one per class would only
    duplicate a generator.  Each class is represented by its lowest-weight
    member from the order where the class first appears.
    """
    if not 0 < reference_lambda <= 1:
        raise ValueError("reference lambda must lie in (0, 1]")
    basis = nested_basis(split, reference_lambda, l)
    sector = conserved_z_mask(split)
    pool: list[PauliWord] = []
    chosen: set[tuple[int, int]] = set()
    for o_k in basis:
        first_seen: dict[tuple[int, int], int] = {}
        best: dict[tuple[int, int], tuple[int, int, PauliWord]] = {}
        for position, (word, _) in enumerate(o_k.terms()):
            key = (word.x_mask, word.z_mask & ~sector)
            if key in chosen:
                continue
            if key not in first_seen:
                first_seen[key] = position
            rank = (word.weight, position)
            if key not in best or rank < best[key][:2]:
                best[key] = (word.weight, position, word)
        for key in sorted(first_seen, key=first_seen.__getitem__):
            chosen.add(key)
            pool.append(best[key][2])
    if not pool:
        raise ValueError(
            "empty generator pool: one- and two-body parts commute"
        )
    return pool


def gauge_residual(
    split: AdiabaticSplit, lam: float, expansion: AgpExpansion
) -> PauliSum:
    """G(alpha) = dH - sum_k alpha_k i[H, O_k] at the expansion's alphas."""
    h_lam = hamiltonian_at(split, lam)
    total = split.h_two
    for alpha, o_k in zip(expansion.alphas, expansion.basis):
        total = total - float(alpha) * (1j * commutator(h_lam, o_k))
    return simplify(total)


def offdiagonal_residual_action(
    split: AdiabaticSplit, lam: float, expansion: AgpExpansion
) -> float:
    """Residual action restricted to the eigenbasis off-diagonal block.

    The action's absolute minimum generally retains a diagonal-in-eigenbasis
    remainder that drives no transitions; the transition-generating part is
    what an exact gauge potential cancels.  Dense diagnostic, small systems
    only.
    """
    h_dense = to_dense_matrix(hamiltonian_at(split, lam))
    _, vecs = np.linalg.eigh(h_dense)
    g_dense = to_dense_matrix(gauge_residual(split, lam, expansion))
    rotated = vecs.conj().T @ g_dense @ vecs
    off = rotated - np.diag(np.diag(rotated))
    return float(np.sum(np.abs(off) ** 2) / off.shape[0])


def two_level_split(delta: float) -> AdiabaticSplit:
    """Canonical avoided-crossing problem H(lam) = delta*X + lam*Z.

    Exact closed forms: A(lam) = -delta / (2 (delta^2 + lam^2)) * Y, so the
    order-1 expansion (O_1 = 2 delta Y) must return
    alpha_1 = -1 / (4 (delta^2 + lam^2)).
    """
    h_one = PauliSum.from_label("X", delta)
    h_two = PauliSum.from_label("Z", 1.0)
    return AdiabaticSplit(h_one=h_one, h_two=h_two, n_qubits=1, mapping="jw")
