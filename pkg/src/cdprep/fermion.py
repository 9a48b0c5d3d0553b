"""Second-quantized molecular Hamiltonians and fermion-to-qubit mappings.

Ingests electron integrals in the FCIDUMP interchange format, builds the
second-quantized Hamiltonian over spin orbitals, and lowers fermionic
operators to qubit operators by the Jordan-Wigner or Bravyi-Kitaev
encoding.

Conventions
-----------
* Spatial orbitals are 0-based internally (FCIDUMP files are 1-based).
* Spin orbitals use blocked ordering: alpha spins occupy indices
  ``0 .. M-1``, beta spins ``M .. 2M-1`` for ``M`` spatial orbitals.
  Qubit p hosts spin orbital p.
* Two-body integrals are stored in chemist notation ``(pq|rs)`` with the
  full 8-fold real-orbital symmetry; the reordering required by the
  second-quantized interaction happens in :func:`build_second_quantized`.
* Annihilation maps to ``(X + iY)/2`` times the parity string, so an
  occupied mode sits in the Z = -1 eigenstate (number operator
  ``(I - Z)/2``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliSum, PauliWord, simplify

__all__ = [
    "MolecularIntegrals",
    "FermionSum",
    "AdiabaticSplit",
    "parse_fcidump",
    "active_space",
    "build_second_quantized",
    "jordan_wigner",
    "bravyi_kitaev",
    "map_fermion_sum",
    "adiabatic_split",
    "map_hamiltonian",
    "hartree_fock_occupations",
    "hartree_fock_index",
    "slater_condon_energy",
    "bk_matrix",
]

_COEFF_TOL = 1e-12


@dataclass
class MolecularIntegrals:
    """Spatial-orbital integrals plus metadata, all in Hartree.

    ``one_body[p, q]`` is h_pq; ``two_body[p, q, r, s]`` is the chemist
    integral (pq|rs).  ``core_energy`` carries nuclear repulsion plus any
    frozen-orbital mean-field shift.
    """

    n_spatial_orbitals: int
    n_electrons: int
    core_energy: float
    one_body: np.ndarray
    two_body: np.ndarray
    bond_distance: float | None = None

    def __post_init__(self):
        m = self.n_spatial_orbitals
        self.one_body = np.asarray(self.one_body, dtype=float)
        self.two_body = np.asarray(self.two_body, dtype=float)
        if self.one_body.shape != (m, m) or self.two_body.shape != (m, m, m, m):
            raise ValueError("integral array shapes do not match orbital count")
        if not 0 < self.n_electrons <= 2 * m:
            raise ValueError(f"electron count {self.n_electrons} out of range")
        if not np.allclose(self.one_body, self.one_body.T, atol=1e-10):
            raise ValueError("one-body integrals are not symmetric")

    @property
    def n_spin_orbitals(self) -> int:
        return 2 * self.n_spatial_orbitals


_TWO_BODY_IMAGES = (
    lambda p, q, r, s: (p, q, r, s),
    lambda p, q, r, s: (q, p, r, s),
    lambda p, q, r, s: (p, q, s, r),
    lambda p, q, r, s: (q, p, s, r),
    lambda p, q, r, s: (r, s, p, q),
    lambda p, q, r, s: (s, r, p, q),
    lambda p, q, r, s: (r, s, q, p),
    lambda p, q, r, s: (s, r, q, p),
)


def parse_fcidump(text: str, bond_distance: float | None = None) -> MolecularIntegrals:
    """Parse FCIDUMP text into :class:`MolecularIntegrals`.

    The namelist header must define NORB and NELEC and end with ``&END``
    or ``/``.  Data lines read ``value p q r s`` with 1-based indices:
    all indices zero marks the core energy, ``r = s = 0`` a one-body
    entry, otherwise a two-body entry (pq|rs) whose 8 permutational
    images are populated.  Duplicate entries that disagree beyond 1e-10
    are rejected.
    """
    header_match = re.search(r"&END|/", text, flags=re.IGNORECASE)
    if not header_match or "&FCI" not in text.upper()[: header_match.start()]:
        raise ValueError("malformed FCIDUMP header: missing &FCI ... &END block")
    header = text[: header_match.start()]
    body = text[header_match.end():]

    norb_match = re.search(r"NORB\s*=\s*(\d+)", header, flags=re.IGNORECASE)
    nelec_match = re.search(r"NELEC\s*=\s*(\d+)", header, flags=re.IGNORECASE)
    if not norb_match or not nelec_match:
        raise ValueError("malformed FCIDUMP header: NORB/NELEC not found")
    m = int(norb_match.group(1))
    n_electrons = int(nelec_match.group(1))

    one_body = np.full((m, m), np.nan)
    two_body = np.full((m, m, m, m), np.nan)
    core_energy = 0.0

    def assign(array, index, value, lineno):
        current = array[index]
        if not np.isnan(current) and abs(current - value) > 1e-10:
            raise ValueError(
                f"line {lineno}: inconsistent duplicate entry at {index}: "
                f"{current!r} vs {value!r}"
            )
        array[index] = value

    for lineno, raw in enumerate(body.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"line {lineno}: expected 'value p q r s'")
        value = float(parts[0].replace("D", "E").replace("d", "e"))
        p, q, r, s = (int(tok) for tok in parts[1:])
        for idx in (p, q, r, s):
            if not 0 <= idx <= m:
                raise ValueError(f"line {lineno}: orbital index {idx} out of range")
        if p == q == r == s == 0:
            core_energy = value
        elif r == 0 and s == 0:
            if p == 0 or q == 0:
                raise ValueError(f"line {lineno}: one-body entry with zero index")
            assign(one_body, (p - 1, q - 1), value, lineno)
            assign(one_body, (q - 1, p - 1), value, lineno)
        else:
            if 0 in (p, q, r, s):
                raise ValueError(f"line {lineno}: two-body entry with zero index")
            base = (p - 1, q - 1, r - 1, s - 1)
            for image in _TWO_BODY_IMAGES:
                assign(two_body, image(*base), value, lineno)

    one_body = np.nan_to_num(one_body, nan=0.0)
    two_body = np.nan_to_num(two_body, nan=0.0)
    return MolecularIntegrals(
        n_spatial_orbitals=m,
        n_electrons=n_electrons,
        core_energy=core_energy,
        one_body=one_body,
        two_body=two_body,
        bond_distance=bond_distance,
    )


def active_space(
    integrals: MolecularIntegrals,
    freeze: tuple[int, ...] = (),
    discard: tuple[int, ...] = (),
) -> MolecularIntegrals:
    """Reduce to an active space of spatial orbitals.

    ``freeze`` lists doubly occupied orbitals whose mean-field
    contribution folds into the core energy; ``discard`` lists empty
    virtuals that are simply removed.  Index lists refer to the current
    orbital numbering.
    """
    frozen = sorted(set(freeze))
    dropped = sorted(set(discard))
    m = integrals.n_spatial_orbitals
    for idx in frozen + dropped:
        if not 0 <= idx < m:
            raise ValueError(f"orbital {idx} out of range")
    if set(frozen) & set(dropped):
        raise ValueError("freeze and discard lists overlap")
    active = [p for p in range(m) if p not in frozen and p not in dropped]
    if not active:
        raise ValueError("active space is empty")
    n_electrons = integrals.n_electrons - 2 * len(frozen)
    if n_electrons <= 0:
        raise ValueError("freezing removes all electrons")

    h = integrals.one_body
    g = integrals.two_body
    core = integrals.core_energy
    for i in frozen:
        core += 2.0 * h[i, i]
        for j in frozen:
            core += 2.0 * g[i, i, j, j] - g[i, j, j, i]
    h_eff = h.copy()
    for i in frozen:
        h_eff += 2.0 * g[:, :, i, i] - g[:, i, i, :]

    sel = np.ix_(active, active)
    sel4 = np.ix_(active, active, active, active)
    return MolecularIntegrals(
        n_spatial_orbitals=len(active),
        n_electrons=n_electrons,
        core_energy=core,
        one_body=h_eff[sel],
        two_body=g[sel4],
        bond_distance=integrals.bond_distance,
    )


class FermionSum:
    """A sum of products of ladder operators over spin orbitals.

    Each term is ``(ops, coefficient)`` where ``ops`` is a tuple of
    ``(spin_orbital_index, is_creation)`` listed in operator order
    (leftmost factor first).  No normal ordering is performed; products
    are taken literally and validated at the qubit level.
    """

    __slots__ = ("n_spin_orbitals", "terms")

    def __init__(self, n_spin_orbitals: int):
        if n_spin_orbitals < 1:
            raise ValueError("need at least one spin orbital")
        self.n_spin_orbitals = n_spin_orbitals
        self.terms: list[tuple[tuple[tuple[int, bool], ...], complex]] = []

    def add_term(self, ops: tuple[tuple[int, bool], ...], coeff: complex) -> None:
        for index, _ in ops:
            if not 0 <= index < self.n_spin_orbitals:
                raise ValueError(f"spin orbital {index} out of range")
        if coeff != 0:
            self.terms.append((tuple(ops), complex(coeff)))

    def adjoint(self) -> "FermionSum":
        out = FermionSum(self.n_spin_orbitals)
        for ops, coeff in self.terms:
            flipped = tuple((idx, not dag) for idx, dag in reversed(ops))
            out.add_term(flipped, coeff.conjugate())
        return out

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"FermionSum(n_spin_orbitals={self.n_spin_orbitals}, n_terms={len(self)})"


def build_second_quantized(integrals: MolecularIntegrals) -> FermionSum:
    """Full electronic Hamiltonian over spin orbitals.

    H = sum_pq h_pq sum_s a+_{ps} a_{qs}
      + 1/2 sum_pqrs (pq|rs) sum_st a+_{ps} a+_{rt} a_{st} a_{qs'}
      + core * 1

    with the chemist integral (pq|rs) attached to the operator pattern
    a+_p a+_r a_s a_q (same-spin selection within each bra/ket pair).
    """
    m = integrals.n_spatial_orbitals
    out = FermionSum(2 * m)
    if integrals.core_energy != 0.0:
        out.add_term((), integrals.core_energy)

    h = integrals.one_body
    for p in range(m):
        for q in range(m):
            if abs(h[p, q]) < _COEFF_TOL:
                continue
            for sigma in (0, 1):
                i, j = p + sigma * m, q + sigma * m
                out.add_term(((i, True), (j, False)), h[p, q])

    g = integrals.two_body
    for p in range(m):
        for q in range(m):
            for r in range(m):
                for s in range(m):
                    val = g[p, q, r, s]
                    if abs(val) < _COEFF_TOL:
                        continue
                    for sigma in (0, 1):
                        for tau in (0, 1):
                            i = p + sigma * m
                            j = r + tau * m
                            k = s + tau * m
                            l = q + sigma * m
                            if i == j or k == l:
                                continue
                            out.add_term(
                                ((i, True), (j, True), (k, False), (l, False)),
                                0.5 * val,
                            )
    return out


# --- fermion-to-qubit encodings -------------------------------------------

_ladder_cache: dict[tuple[str, int, int, bool], PauliSum] = {}


def _jw_ladder(index: int, creation: bool, n_qubits: int) -> PauliSum:
    key = ("jw", n_qubits, index, creation)
    cached = _ladder_cache.get(key)
    if cached is not None:
        return cached
    z_string = (1 << index) - 1
    x_word = PauliWord((1 << index), z_string, n_qubits)
    y_word = PauliWord((1 << index), z_string | (1 << index), n_qubits)
    sign = -0.5j if creation else 0.5j
    out = PauliSum(n_qubits, [(x_word, 0.5), (y_word, sign)])
    _ladder_cache[key] = out
    return out


def _gf2_inverse(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    work = mat.astype(np.int64) % 2
    inv = np.eye(n, dtype=np.int64)
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r, col]), None)
        if pivot is None:
            raise ValueError("encoding matrix is singular over GF(2)")
        if pivot != col:
            work[[col, pivot]] = work[[pivot, col]]
            inv[[col, pivot]] = inv[[pivot, col]]
        for r in range(n):
            if r != col and work[r, col]:
                work[r] ^= work[col]
                inv[r] ^= inv[col]
    return inv % 2


def _fenwick_children(n: int) -> list[list[int]]:
    children: list[list[int]] = [[] for _ in range(n)]

    def descend(left: int, right: int, parent: int) -> None:
        if left >= right:
            return
        pivot = (left + right) >> 1
        children[parent].append(pivot)
        descend(left, pivot, pivot)
        descend(pivot + 1, right, parent)

    if n > 1:
        descend(0, n - 1, n - 1)
    return children


def bk_matrix(n_qubits: int) -> np.ndarray:
    """Binary encoding matrix B with b = B f (mod 2).

    Row i of B marks the modes in the Fenwick subtree rooted at i, i.e.
    encoded bit i stores the partial occupation sum of that subtree.
    """
    children = _fenwick_children(n_qubits)
    mat = np.zeros((n_qubits, n_qubits), dtype=np.int64)

    def fill(root: int, node: int) -> None:
        mat[root, node] = 1
        for child in children[node]:
            fill(root, child)

    for i in range(n_qubits):
        fill(i, i)
    return mat


def _bk_sets(n_qubits: int) -> list[tuple[int, int, int]]:
    """Per mode j: bitmasks of the update, parity and remainder sets."""
    children = _fenwick_children(n_qubits)
    mat = bk_matrix(n_qubits)
    inv_t = _gf2_inverse(mat).T
    sets = []
    for j in range(n_qubits):
        update = 0
        for i in range(n_qubits):
            if i != j and mat[i, j]:
                update |= 1 << i
        prefix = np.zeros(n_qubits, dtype=np.int64)
        prefix[:j] = 1
        parity_vec = (inv_t @ prefix) % 2
        parity = int(sum(1 << i for i in range(n_qubits) if parity_vec[i]))
        flip = int(sum(1 << c for c in children[j]))
        remainder = parity & ~flip
        sets.append((update, parity, remainder))
    return sets


_bk_sets_cache: dict[int, list[tuple[int, int, int]]] = {}


def _bk_ladder(index: int, creation: bool, n_qubits: int) -> PauliSum:
    key = ("bk", n_qubits, index, creation)
    cached = _ladder_cache.get(key)
    if cached is not None:
        return cached
    if n_qubits not in _bk_sets_cache:
        _bk_sets_cache[n_qubits] = _bk_sets(n_qubits)
    update, parity, remainder = _bk_sets_cache[n_qubits][index]
    # a_j = 1/2 X_U X_j Z_P + (i/2) X_U Y_j Z_R ; creation flips the sign
    # of the imaginary component (adjoint).
    own = 1 << index
    x_word = PauliWord(update | own, parity, n_qubits)
    y_word = PauliWord(update | own, remainder | own, n_qubits)
    sign = -0.5j if creation else 0.5j
    out = PauliSum(n_qubits, [(x_word, 0.5), (y_word, sign)])
    _ladder_cache[key] = out
    return out


def map_fermion_sum(f: FermionSum, mapping: str) -> PauliSum:
    """Lower a FermionSum to qubits; mapping is 'jw' or 'bk'."""
    mapping = mapping.lower()
    if mapping == "jw":
        ladder = _jw_ladder
    elif mapping == "bk":
        ladder = _bk_ladder
    else:
        raise ValueError(f"unknown mapping {mapping!r} (expected 'jw' or 'bk')")
    n = f.n_spin_orbitals
    out = PauliSum(n)
    identity = PauliWord.identity(n)
    for ops, coeff in f.terms:
        prod = PauliSum(n, [(identity, coeff)])
        for index, creation in ops:
            prod = prod @ ladder(index, creation, n)
        for word, c in prod.terms():
            out.add_term(word, c)
    return simplify(out, _COEFF_TOL)


def jordan_wigner(f: FermionSum) -> PauliSum:
    return map_fermion_sum(f, "jw")


def bravyi_kitaev(f: FermionSum) -> PauliSum:
    return map_fermion_sum(f, "bk")


@dataclass
class AdiabaticSplit:
    """Mapped Hamiltonian split for interpolation.

    ``h_one`` holds the one-body part plus the core identity term,
    ``h_two`` the two-body part; the full Hamiltonian is their sum.
    """

    h_one: PauliSum
    h_two: PauliSum
    n_qubits: int
    mapping: str = "bk"
    hf_index: int | None = None

    def full(self) -> PauliSum:
        return self.h_one + self.h_two


def adiabatic_split(integrals: MolecularIntegrals, mapping: str = "bk") -> AdiabaticSplit:
    """Map the one- and two-body parts separately."""
    m = integrals.n_spatial_orbitals
    one = MolecularIntegrals(
        n_spatial_orbitals=m,
        n_electrons=integrals.n_electrons,
        core_energy=integrals.core_energy,
        one_body=integrals.one_body,
        two_body=np.zeros_like(integrals.two_body),
        bond_distance=integrals.bond_distance,
    )
    two = MolecularIntegrals(
        n_spatial_orbitals=m,
        n_electrons=integrals.n_electrons,
        core_energy=0.0,
        one_body=np.zeros_like(integrals.one_body),
        two_body=integrals.two_body,
        bond_distance=integrals.bond_distance,
    )
    # core rides along in h_one even when zero-valued two-body screening
    # empties h_two entirely
    h_one = map_fermion_sum(build_second_quantized(one), mapping)
    h_two_fermion = build_second_quantized(two)
    h_two = (
        map_fermion_sum(h_two_fermion, mapping)
        if len(h_two_fermion)
        else PauliSum(2 * m)
    )
    return AdiabaticSplit(
        h_one=h_one,
        h_two=h_two,
        n_qubits=2 * m,
        mapping=mapping,
        hf_index=hartree_fock_index(integrals.n_electrons, 2 * m, mapping),
    )


def map_hamiltonian(integrals: MolecularIntegrals, mapping: str = "bk") -> PauliSum:
    return map_fermion_sum(build_second_quantized(integrals), mapping)


def hartree_fock_occupations(n_electrons: int, n_spatial: int) -> list[int]:
    """Aufbau closed-shell filling under blocked spin-orbital ordering."""
    n_alpha = (n_electrons + 1) // 2
    n_beta = n_electrons // 2
    if n_alpha > n_spatial:
        raise ValueError("electron count exceeds orbital capacity")
    return list(range(n_alpha)) + [n_spatial + p for p in range(n_beta)]


def hartree_fock_index(n_electrons: int, n_qubits: int, mapping: str = "jw") -> int:
    """Computational basis index of the mean-field determinant.

    Under JW the index directly encodes the occupation vector; under BK
    the occupation vector is pushed through the encoding matrix mod 2.
    """
    if n_electrons > n_qubits:
        raise ValueError("electron count exceeds mode count")
    if n_electrons == 0:
        return 0
    if n_qubits % 2 == 0:
        occupied = hartree_fock_occupations(n_electrons, n_qubits // 2)
    else:
        occupied = list(range(n_electrons))
    occ_vec = np.zeros(n_qubits, dtype=np.int64)
    occ_vec[occupied] = 1
    mapping = mapping.lower()
    if mapping == "jw":
        bits = occ_vec
    elif mapping == "bk":
        bits = (bk_matrix(n_qubits) @ occ_vec) % 2
    else:
        raise ValueError(f"unknown mapping {mapping!r}")
    return int(sum(1 << i for i in range(n_qubits) if bits[i]))


def slater_condon_energy(integrals: MolecularIntegrals, occupied: list[int]) -> float:
    """Energy of a single determinant directly from the integrals.

    ``occupied`` lists spin orbitals (blocked ordering).  Used as the
    independent oracle for mean-field expectation values.
    """
    m = integrals.n_spatial_orbitals
    h = integrals.one_body
    g = integrals.two_body
    energy = integrals.core_energy
    for i in occupied:
        energy += h[i % m, i % m]
    for i in occupied:
        pi, si = i % m, i // m
        for j in occupied:
            pj, sj = j % m, j // m
            coulomb = g[pi, pi, pj, pj]
            exchange = g[pi, pj, pj, pi] if si == sj else 0.0
            energy += 0.5 * (coulomb - exchange)
    return float(energy)
