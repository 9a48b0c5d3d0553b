"""Variational ground-state search over product-form ansatz circuits.

Ansatz generators are Hermitian Pauli sums applied as an ordered product
of per-word exponentials; gauge-pool circuits take one parameter per
pool word, excitation circuits one per fermionic excitation.  Gradients
use the exact two-point shift rule where a parameter drives a single
unit-coefficient word and central finite differences otherwise.  The
optimizer is a multi-start quasi-Newton descent; an adaptive loop grows
the circuit operator by operator from commutator selection gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .agp import aga_pool
from .fermion import (
    AdiabaticSplit,
    FermionSum,
    MolecularIntegrals,
    adiabatic_split,
    hartree_fock_occupations,
    map_fermion_sum,
)
from .pauli import PauliSum, PauliWord, simplify
from .simulator import (
    Statevector,
    apply_pauli_exp,
    basis_state,
    expectation,
    ground_state,
)
from .simulator import _word_action

__all__ = [
    "CHEMICAL_ACCURACY",
    "AdaptRun",
    "AdaptSelection",
    "Ansatz",
    "OptimizerConfig",
    "ScanResult",
    "ScanRow",
    "VqeResult",
    "adapt_gradients",
    "adapt_pool",
    "adapt_vqe",
    "bond_scan",
    "build_aga",
    "build_agar",
    "build_kupccgsd",
    "build_uccsd",
    "energy",
    "gradient",
    "multi_start_minimize",
    "optimize",
    "prepare_state",
]

# 1 kcal/mol expressed in Hartree: the convergence threshold used for the
# chemical-accuracy predicate everywhere in this package
CHEMICAL_ACCURACY = 1.5936e-3


@dataclass(frozen=True)
class Ansatz:
    """Ordered product circuit: apply exp(-i theta[idx] G) generator by generator."""

    generators: tuple[tuple[PauliSum, int], ...]
    n_parameters: int
    label: str

    def __post_init__(self):
        for gen, idx in self.generators:
            if not 0 <= idx < self.n_parameters:
                raise ValueError(f"parameter index {idx} out of range")
            if not gen.is_hermitian():
                raise ValueError("ansatz generators must be Hermitian")

    @property
    def n_qubits(self) -> int:
        if not self.generators:
            raise ValueError("ansatz has no generators")
        return self.generators[0][0].n_qubits


def prepare_state(ansatz: Ansatz, theta, initial: Statevector) -> Statevector:
    """Ordered exponential product applied to the initial state.

    Generators are applied in list order (the first generator acts on the
    initial state first); within one generator the exponential is the
    product over its Pauli words, exact whenever the words commute.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (ansatz.n_parameters,):
        raise ValueError(
            f"parameter count mismatch: got {theta.shape}, "
            f"need ({ansatz.n_parameters},)"
        )
    if ansatz.generators and ansatz.n_qubits != initial.n_qubits:
        raise ValueError("qubit-count mismatch between ansatz and state")
    state = initial.copy()
    for gen, idx in ansatz.generators:
        th = theta[idx]
        if th == 0.0:
            continue
        for word, coeff in gen.terms():
            apply_pauli_exp(state, word, th * coeff.real)
    return state


def energy(ansatz: Ansatz, theta, initial: Statevector, h: PauliSum) -> float:
    """Expectation of h in the prepared state."""
    return expectation(prepare_state(ansatz, theta, initial), h)


def _shift_eligible(ansatz: Ansatz) -> list[bool]:
    # the two-point rule is exact only for a parameter that drives exactly
    # one exponential of a single unit-coefficient Pauli word
    users: dict[int, list[PauliSum]] = {}
    for gen, idx in ansatz.generators:
        users.setdefault(idx, []).append(gen)
    out = []
    for j in range(ansatz.n_parameters):
        gens = users.get(j, [])
        if len(gens) != 1:
            out.append(False)
            continue
        terms = list(gens[0].terms())
        out.append(len(terms) == 1 and abs(terms[0][1]) == 1.0)
    return out


def gradient(
    ansatz: Ansatz,
    theta,
    initial: Statevector,
    h: PauliSum,
    fd_step: float = 1e-5,
) -> np.ndarray:
    """dE/dtheta: exact shift rule per single-word parameter, else central FD."""
    theta = np.asarray(theta, dtype=float)
    eligible = _shift_eligible(ansatz)
    out = np.zeros(ansatz.n_parameters)
    for j in range(ansatz.n_parameters):
        probe = theta.copy()
        if eligible[j]:
            probe[j] = theta[j] + np.pi / 4
            up = energy(ansatz, probe, initial, h)
            probe[j] = theta[j] - np.pi / 4
            down = energy(ansatz, probe, initial, h)
            out[j] = up - down
        else:
            probe[j] = theta[j] + fd_step
            up = energy(ansatz, probe, initial, h)
            probe[j] = theta[j] - fd_step
            down = energy(ansatz, probe, initial, h)
            out[j] = (up - down) / (2.0 * fd_step)
    return out


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 2000
    gradient_tolerance: float = 1e-8
    seed: int = 0
    starts: tuple[str, ...] = ("zeros", "perturbed", "random")
    perturbation: float = 1e-2
    random_halfwidth: float = 0.1
    fd_step: float = 1e-5

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.gradient_tolerance > 0:
            raise ValueError("gradient_tolerance must be positive")
        if not self.starts:
            raise ValueError("at least one start policy is required")
        for name in self.starts:
            if name not in ("zeros", "perturbed", "random"):
                raise ValueError(f"unknown start policy {name!r}")


@dataclass
class MinimizeOutcome:
    parameters: np.ndarray
    fun: float
    iterations: int
    history: list[float]


class _NonFiniteValue(Exception):
    pass


def _start_points(n_parameters: int, cfg: OptimizerConfig) -> list[np.ndarray]:
    rng = np.random.default_rng(cfg.seed)
    points = []
    for name in cfg.starts:
        if name == "zeros":
            points.append(np.zeros(n_parameters))
        elif name == "perturbed":
            points.append(np.full(n_parameters, cfg.perturbation))
        else:
            points.append(
                rng.uniform(-cfg.random_halfwidth, cfg.random_halfwidth, n_parameters)
            )
    return points


def multi_start_minimize(
    fun, jac, n_parameters: int, cfg: OptimizerConfig = OptimizerConfig()
) -> MinimizeOutcome:
    """Quasi-Newton descent from each configured start, keeping the minimum.

    A start whose objective turns non-finite (diverged line search) is
    abandoned; the remaining starts still run.
    """

    def guarded(x):
        value = float(fun(x))
        if not np.isfinite(value):
            raise _NonFiniteValue
        return value

    history: list[float] = []
    best_x = None
    best_f = np.inf
    total_iterations = 0
    for x0 in _start_points(n_parameters, cfg):
        try:
            result = _scipy_minimize(
                guarded,
                x0,
                jac=jac,
                method="BFGS",
                callback=lambda xk: history.append(float(fun(xk))),
                options={
                    "gtol": cfg.gradient_tolerance,
                    "maxiter": cfg.max_iterations,
                },
            )
        except _NonFiniteValue:
            continue
        total_iterations += int(result.nit)
        if result.fun < best_f:
            best_f = float(result.fun)
            best_x = np.array(result.x, dtype=float)
    if best_x is None:
        raise ValueError("every optimizer start diverged to a non-finite value")
    return MinimizeOutcome(
        parameters=best_x,
        fun=best_f,
        iterations=total_iterations,
        history=history,
    )


@dataclass
class VqeResult:
    energy: float
    parameters: np.ndarray
    iterations: int
    gradient_norm: float
    epsilon: float
    history: list[float]


def _reference_energy(initial: Statevector, h: PauliSum) -> float:
    guess = int(np.argmax(np.abs(initial.amplitudes)))
    return ground_state(h, guess_index=guess).energy


def optimize(
    ansatz: Ansatz,
    initial: Statevector,
    h: PauliSum,
    cfg: OptimizerConfig = OptimizerConfig(),
    reference_energy: float | None = None,
) -> VqeResult:
    """Minimize the prepared-state energy over the ansatz parameters."""
    if reference_energy is None:
        reference_energy = _reference_energy(initial, h)

    def fun(x):
        return energy(ansatz, x, initial, h)

    def jac(x):
        return gradient(ansatz, x, initial, h, fd_step=cfg.fd_step)

    out = multi_start_minimize(fun, jac, ansatz.n_parameters, cfg)
    return VqeResult(
        energy=out.fun,
        parameters=out.parameters,
        iterations=out.iterations,
        gradient_norm=float(np.linalg.norm(jac(out.parameters))),
        epsilon=out.fun - reference_energy,
        history=out.history,
    )


def build_aga(pool: list[PauliWord], l: int) -> Ansatz:
    """One unit-coefficient generator and one parameter per pool word."""
    if not pool:
        raise ValueError("empty generator pool")
    generators = tuple(
        (PauliSum.from_label(word.label(), 1.0), j) for j, word in enumerate(pool)
    )
    return Ansatz(generators=generators, n_parameters=len(pool), label=f"AGA({l})")


def build_agar(pool: list[PauliWord]) -> Ansatz:
    """Pool restricted to words touching at most two qubits."""
    kept = [w for w in pool if w.weight <= 2]
    if not kept:
        raise ValueError("weight filter emptied the generator pool")
    ansatz = build_aga(kept, 1)
    return Ansatz(
        generators=ansatz.generators,
        n_parameters=ansatz.n_parameters,
        label="AGAR(1)",
    )


UCCSD_MODES = ("index-ordered", "spin-orbital", "singlet")


def _excitation(terms, n_spin_orbitals: int, mapping: str) -> PauliSum:
    # i(T - T^dagger) for T given as [(ladder ops, coefficient), ...]
    f = FermionSum(n_spin_orbitals)
    for ops, coeff in terms:
        f.add_term(ops, 1j * coeff)
    adj = f.adjoint()
    for ops, coeff in adj.terms:
        f.add_term(ops, coeff)
    mapped = simplify(map_fermion_sum(f, mapping))
    if not list(mapped.terms()):
        raise ValueError("excitation generator mapped to zero")
    return mapped


def _occupied_virtual(n_electrons: int, n_spatial_orbitals: int):
    occupied = hartree_fock_occupations(n_electrons, n_spatial_orbitals)
    virtual = sorted(set(range(2 * n_spatial_orbitals)) - set(occupied))
    return occupied, virtual


def build_uccsd(
    n_electrons: int,
    n_spatial_orbitals: int,
    mapping: str = "jw",
    mode: str = "index-ordered",
) -> Ansatz:
    """Unitary singles-and-doubles excitations from the aufbau reference.

    Counting modes for the singles block:
      index-ordered  spin-orbital pairs p (occupied) -> q (virtual) with
                     q > p, spin crossings included;
      spin-orbital   same-spin pairs only;
      singlet        spin-summed spatial pairs (doubles spin-summed too).
    Doubles conserve the spin projection in the first two modes.
    """
    if mode not in UCCSD_MODES:
        raise ValueError(f"unknown counting mode {mode!r}, pick from {UCCSD_MODES}")
    m = n_spatial_orbitals
    if not 1 <= n_electrons <= 2 * m:
        raise ValueError("electron count does not fit the orbital space")
    occupied, virtual = _occupied_virtual(n_electrons, m)
    spin = lambda p: p // m
    generators = []

    if mode == "singlet":
        if n_electrons % 2:
            raise ValueError("singlet counting requires a closed shell")
        occ_sp = range(n_electrons // 2)
        virt_sp = range(n_electrons // 2, m)
        for i in occ_sp:
            for a in virt_sp:
                terms = [
                    (((a + sigma * m, True), (i + sigma * m, False)), 1.0)
                    for sigma in (0, 1)
                ]
                generators.append(_excitation(terms, 2 * m, mapping))
        for i in occ_sp:
            for j in occ_sp:
                if j < i:
                    continue
                for a in virt_sp:
                    for b in virt_sp:
                        if b < a:
                            continue
                        terms = []
                        for sigma in (0, 1):
                            for tau in (0, 1):
                                ops = (
                                    (a + sigma * m, True),
                                    (b + tau * m, True),
                                    (j + tau * m, False),
                                    (i + sigma * m, False),
                                )
                                if ops[0][0] == ops[1][0] or ops[2][0] == ops[3][0]:
                                    continue
                                terms.append((ops, 1.0))
                        generators.append(_excitation(terms, 2 * m, mapping))
    else:
        for p in occupied:
            for q in virtual:
                if mode == "index-ordered" and q <= p:
                    continue
                if mode == "spin-orbital" and spin(p) != spin(q):
                    continue
                generators.append(
                    _excitation([(((q, True), (p, False)), 1.0)], 2 * m, mapping)
                )
        for ii, i in enumerate(occupied):
            for j in occupied[ii + 1 :]:
                for ai, a in enumerate(virtual):
                    for b in virtual[ai + 1 :]:
                        if spin(i) + spin(j) != spin(a) + spin(b):
                            continue
                        ops = ((a, True), (b, True), (j, False), (i, False))
                        generators.append(_excitation([(ops, 1.0)], 2 * m, mapping))

    return Ansatz(
        generators=tuple((gen, j) for j, gen in enumerate(generators)),
        n_parameters=len(generators),
        label="UCCSD",
    )


def build_kupccgsd(
    k: int, n_electrons: int, n_spatial_orbitals: int, mapping: str = "jw"
) -> Ansatz:
    """k repetitions of generalized singles plus same-pair doubles.

    Each block carries its own parameters: spin-resolved singles over all
    ordered spatial pairs p != q, then doubles moving an opposite-spin
    pair from orbital p to orbital q, ordered the same way.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    m = n_spatial_orbitals
    if not 1 <= n_electrons <= 2 * m:
        raise ValueError("electron count does not fit the orbital space")
    block: list[PauliSum] = []
    for sigma in (0, 1):
        for p in range(m):
            for q in range(m):
                if p == q:
                    continue
                ops = ((q + sigma * m, True), (p + sigma * m, False))
                block.append(_excitation([(ops, 1.0)], 2 * m, mapping))
    for p in range(m):
        for q in range(m):
            if p == q:
                continue
            ops = ((q, True), (q + m, True), (p + m, False), (p, False))
            block.append(_excitation([(ops, 1.0)], 2 * m, mapping))
    generators = []
    for rep in range(k):
        offset = rep * len(block)
        generators.extend((gen, offset + j) for j, gen in enumerate(block))
    return Ansatz(
        generators=tuple(generators),
        n_parameters=k * len(block),
        label=f"{k}-UpCCGSD",
    )


def _sum_action(h: PauliSum, state: Statevector) -> np.ndarray:
    out = np.zeros_like(state.amplitudes)
    for word, coeff in h.terms():
        out += coeff * _word_action(state.amplitudes, word.x_mask, word.z_mask)
    return out


def adapt_pool(
    n_electrons: int, n_spatial_orbitals: int, mapping: str = "bk"
) -> list[PauliSum]:
    """Default adaptive pool: the spin-summed excitation generators."""
    ansatz = build_uccsd(n_electrons, n_spatial_orbitals, mapping, mode="singlet")
    return [gen for gen, _ in ansatz.generators]


def adapt_gradients(
    pool: list[PauliSum], state: Statevector, h: PauliSum
) -> np.ndarray:
    """dE/dtheta at theta=0 for appending exp(-i theta A) per pool element."""
    h_psi = _sum_action(h, state)
    out = np.zeros(len(pool))
    for j, gen in enumerate(pool):
        a_psi = _sum_action(gen, state)
        out[j] = 2.0 * float(np.imag(np.vdot(h_psi, a_psi)))
    return out


@dataclass(frozen=True)
class AdaptSelection:
    index: int
    magnitude: float
    norm: float


@dataclass
class AdaptRun:
    ansatz: Ansatz
    result: VqeResult
    selections: list[AdaptSelection]


def adapt_vqe(
    pool: list[PauliSum],
    initial: Statevector,
    h: PauliSum,
    threshold: float = 1e-3,
    max_ops: int = 30,
    cfg: OptimizerConfig = OptimizerConfig(),
    reference_energy: float | None = None,
) -> AdaptRun:
    """Grow the circuit by the largest-gradient pool operator until quiet.

    Each round measures all pool selection gradients in the current state,
    appends the largest-magnitude operator (ties fall to the lower pool
    index), refines every parameter, and stops once the gradients seen at
    selection time had norm below the threshold or max_ops is reached.
    """
    if not pool:
        raise ValueError("adaptive pool must be non-empty")
    if reference_energy is None:
        reference_energy = _reference_energy(initial, h)
    chosen: list[PauliSum] = []
    theta = np.zeros(0)
    selections: list[AdaptSelection] = []
    history: list[float] = []
    total_iterations = 0
    ansatz = None
    for step in range(max_ops):
        if chosen:
            state = prepare_state(ansatz, theta, initial)
        else:
            state = initial
        grads = adapt_gradients(pool, state, h)
        magnitudes = np.abs(grads)
        k = int(np.argmax(magnitudes))
        norm_g = float(np.linalg.norm(grads))
        if step == 0 and magnitudes[k] < 1e-12:
            raise ValueError(
                "stalled: every pool gradient vanishes at the reference state"
            )
        chosen.append(pool[k])
        theta = np.append(theta, 0.0)
        selections.append(
            AdaptSelection(index=k, magnitude=float(magnitudes[k]), norm=norm_g)
        )
        ansatz = Ansatz(
            generators=tuple((g, i) for i, g in enumerate(chosen)),
            n_parameters=len(chosen),
            label="ADAPT",
        )

        def fun(x):
            return energy(ansatz, x, initial, h)

        def jac(x):
            return gradient(ansatz, x, initial, h, fd_step=cfg.fd_step)

        refined = _scipy_minimize(
            fun,
            theta,
            jac=jac,
            method="BFGS",
            callback=lambda xk: history.append(float(fun(xk))),
            options={"gtol": cfg.gradient_tolerance, "maxiter": cfg.max_iterations},
        )
        theta = np.array(refined.x, dtype=float)
        total_iterations += int(refined.nit)
        if norm_g < threshold:
            break
    final_energy = energy(ansatz, theta, initial, h)
    result = VqeResult(
        energy=final_energy,
        parameters=theta,
        iterations=total_iterations,
        gradient_norm=float(
            np.linalg.norm(gradient(ansatz, theta, initial, h, fd_step=cfg.fd_step))
        ),
        epsilon=final_energy - reference_energy,
        history=history,
    )
    return AdaptRun(ansatz=ansatz, result=result, selections=selections)


@dataclass(frozen=True)
class ScanRow:
    bond_distance: float | None
    ansatz: str
    n_parameters: int | None
    energy: float | None
    e0: float | None
    epsilon: float | None
    chemical_accuracy: bool | None
    error: str | None = None


@dataclass
class ScanResult:
    rows: list[ScanRow]

    def to_csv(self) -> str:
        lines = [
            "# schema=1",
            "bond_distance,ansatz,n_parameters,energy,e0,epsilon,chemical_accuracy",
        ]
        for r in self.rows:
            lines.append(
                ",".join(
                    [
                        "" if r.bond_distance is None else format(r.bond_distance, ".6g"),
                        r.ansatz,
                        "" if r.n_parameters is None else str(r.n_parameters),
                        "" if r.energy is None else format(r.energy, ".12e"),
                        "" if r.e0 is None else format(r.e0, ".12e"),
                        "" if r.epsilon is None else format(r.epsilon, ".12e"),
                        ""
                        if r.chemical_accuracy is None
                        else str(r.chemical_accuracy).lower(),
                    ]
                )
            )
        return "\n".join(lines) + "\n"


_SCAN_ANSATZES = ("aga", "agar", "uccsd", "kupccgsd", "adapt")


def _parse_ansatz_spec(spec: str):
    name, _, arg = spec.partition(":")
    if name not in _SCAN_ANSATZES:
        raise ValueError(f"unknown ansatz {name!r}, pick from {_SCAN_ANSATZES}")
    return name, arg


def bond_scan(
    integrals_list: list[MolecularIntegrals],
    ansatz_specs: list[str],
    opt_cfg: OptimizerConfig = OptimizerConfig(),
    mapping: str = "bk",
    pool_order: int = 1,
    adapt_threshold: float = 1e-3,
    adapt_max_ops: int = 30,
) -> ScanResult:
    """One variational run per (molecule point, ansatz spec) pair.

    Specs: "aga", "agar", "uccsd" (optionally "uccsd:<mode>"),
    "kupccgsd:<k>" (k defaults to 1), "adapt".  A failing cell records
    its message and the scan continues.
    """
    if not integrals_list or not ansatz_specs:
        raise ValueError("scan needs at least one point and one ansatz")
    parsed = [_parse_ansatz_spec(s) for s in ansatz_specs]
    rows: list[ScanRow] = []
    for integrals in integrals_list:
        split = adiabatic_split(integrals, mapping=mapping)
        h_full = split.full()
        initial = basis_state(split.hf_index, split.n_qubits)
        e0 = ground_state(h_full, guess_index=split.hf_index).energy
        for spec, (name, arg) in zip(ansatz_specs, parsed):
            try:
                if name == "adapt":
                    run = adapt_vqe(
                        adapt_pool(
                            integrals.n_electrons,
                            integrals.n_spatial_orbitals,
                            mapping,
                        ),
                        initial,
                        h_full,
                        threshold=adapt_threshold,
                        max_ops=adapt_max_ops,
                        cfg=opt_cfg,
                        reference_energy=e0,
                    )
                    result, n_parameters = run.result, run.ansatz.n_parameters
                else:
                    if name in ("aga", "agar"):
                        pool = aga_pool(split, int(arg) if arg else pool_order)
                        ansatz = (
                            build_aga(pool, int(arg) if arg else pool_order)
                            if name == "aga"
                            else build_agar(pool)
                        )
                    elif name == "uccsd":
                        ansatz = build_uccsd(
                            integrals.n_electrons,
                            integrals.n_spatial_orbitals,
                            mapping,
                            mode=arg or "index-ordered",
                        )
                    else:
                        ansatz = build_kupccgsd(
                            int(arg) if arg else 1,
                            integrals.n_electrons,
                            integrals.n_spatial_orbitals,
                            mapping,
                        )
                    result = optimize(
                        ansatz, initial, h_full, cfg=opt_cfg, reference_energy=e0
                    )
                    n_parameters = ansatz.n_parameters
                rows.append(
                    ScanRow(
                        bond_distance=integrals.bond_distance,
                        ansatz=spec,
                        n_parameters=n_parameters,
                        energy=result.energy,
                        e0=e0,
                        epsilon=result.epsilon,
                        chemical_accuracy=bool(result.epsilon < CHEMICAL_ACCURACY),
                    )
                )
            except ValueError as exc:
                rows.append(
                    ScanRow(
                        bond_distance=integrals.bond_distance,
                        ansatz=spec,
                        n_parameters=None,
                        energy=None,
                        e0=e0,
                        epsilon=None,
                        chemical_accuracy=None,
                        error=str(exc),
                    )
                )
    return ScanResult(rows=rows)
