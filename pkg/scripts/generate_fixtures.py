#!/usr/bin/env python3
"""Generate the bundled FCIDUMP fixtures and reference energies.

Self-contained minimal electronic-structure code: STO-3G integrals over
s and p Cartesian Gaussians (McMurchie-Davidson scheme), restricted
Hartree-Fock with DIIS, MO transformation, FCIDUMP emission, and a
determinant full-CI solver used to record reference energies.

The script validates itself before writing anything:

* the 2-orbital H2 SCF energy at 1.4 bohr must reproduce the standard
  minimal-basis literature value to 1e-3 Ha,
* the determinant-CI matrix is checked against a dense Fock-space build
  of the same Hamiltonian on small systems (all eigenvalues),
* SCF energy must equal the CI diagonal of the mean-field determinant,
* Brillouin's theorem: CI coupling between the mean-field determinant
  and single excitations vanishes for converged canonical orbitals.

Outputs (committed to the repository):
  src/cdprep/fixtures/<name>.fcidump
  src/cdprep/fixtures/reference_energies.json
  src/cdprep/fixtures/manifest.json        (sha256 checksums)

Run from the repository root:  python3 scripts/generate_fixtures.py
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import math
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.special import hyp1f1

ANGSTROM_PER_BOHR = 0.529177210903

# STO-3G exponents and contraction coefficients (EMSL basis set exchange)
STO3G = {
    "H": [
        ("s", [3.425250914, 0.6239137298, 0.1688554040],
         [0.1543289673, 0.5353281423, 0.4446345422]),
    ],
    "Li": [
        ("s", [16.11957475, 2.936200663, 0.7946504870],
         [0.1543289673, 0.5353281423, 0.4446345422]),
        ("sp", [0.6362897469, 0.1478600533, 0.0480886784],
         [-0.09996722919, 0.3995128261, 0.7001154689],
         [0.1559162750, 0.6076837186, 0.3919573931]),
    ],
    "Be": [
        ("s", [30.16787069, 5.495115306, 1.487192653],
         [0.1543289673, 0.5353281423, 0.4446345422]),
        ("sp", [1.314833110, 0.3055389383, 0.0993707456],
         [-0.09996722919, 0.3995128261, 0.7001154689],
         [0.1559162750, 0.6076837186, 0.3919573931]),
    ],
}

CHARGE = {"H": 1, "Li": 3, "Be": 4}


# --- Gaussian integrals (McMurchie-Davidson) ---------------------------------


@lru_cache(maxsize=None)
def hermite_expansion(i, j, t, qx, a, b):
    p = a + b
    q = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return math.exp(-q * qx * qx)
    if i > 0:
        return (
            hermite_expansion(i - 1, j, t - 1, qx, a, b) / (2 * p)
            - (q * qx / a) * hermite_expansion(i - 1, j, t, qx, a, b)
            + (t + 1) * hermite_expansion(i - 1, j, t + 1, qx, a, b)
        )
    return (
        hermite_expansion(i, j - 1, t - 1, qx, a, b) / (2 * p)
        + (q * qx / b) * hermite_expansion(i, j - 1, t, qx, a, b)
        + (t + 1) * hermite_expansion(i, j - 1, t + 1, qx, a, b)
    )


def overlap_prim(a, lmn1, origin1, b, lmn2, origin2):
    value = (math.pi / (a + b)) ** 1.5
    for axis in range(3):
        value *= hermite_expansion(
            lmn1[axis], lmn2[axis], 0, origin1[axis] - origin2[axis], a, b
        )
    return value


def kinetic_prim(a, lmn1, origin1, b, lmn2, origin2):
    l2, m2, n2 = lmn2

    def ov(lmn):
        return overlap_prim(a, lmn1, origin1, b, lmn, origin2)

    term0 = b * (2 * (l2 + m2 + n2) + 3) * ov((l2, m2, n2))
    term1 = -2.0 * b * b * (
        ov((l2 + 2, m2, n2)) + ov((l2, m2 + 2, n2)) + ov((l2, m2, n2 + 2))
    )
    term2 = -0.5 * (
        l2 * (l2 - 1) * ov((l2 - 2, m2, n2))
        + m2 * (m2 - 1) * ov((l2, m2 - 2, n2))
        + n2 * (n2 - 1) * ov((l2, m2, n2 - 2))
    )
    return term0 + term1 + term2


def boys(n, t):
    return hyp1f1(n + 0.5, n + 1.5, -t) / (2.0 * n + 1.0)


def hermite_coulomb(t, u, v, n, p, pc, memo):
    key = (t, u, v, n)
    if key in memo:
        return memo[key]
    if t < 0 or u < 0 or v < 0:
        return 0.0
    if t == u == v == 0:
        value = (-2.0 * p) ** n * boys(n, p * float(np.dot(pc, pc)))
    elif t > 0:
        value = (t - 1) * hermite_coulomb(t - 2, u, v, n + 1, p, pc, memo)
        value += pc[0] * hermite_coulomb(t - 1, u, v, n + 1, p, pc, memo)
    elif u > 0:
        value = (u - 1) * hermite_coulomb(t, u - 2, v, n + 1, p, pc, memo)
        value += pc[1] * hermite_coulomb(t, u - 1, v, n + 1, p, pc, memo)
    else:
        value = (v - 1) * hermite_coulomb(t, u, v - 2, n + 1, p, pc, memo)
        value += pc[2] * hermite_coulomb(t, u, v - 1, n + 1, p, pc, memo)
    memo[key] = value
    return value


def nuclear_prim(a, lmn1, origin1, b, lmn2, origin2, center):
    p = a + b
    big_p = (a * np.asarray(origin1) + b * np.asarray(origin2)) / p
    pc = big_p - np.asarray(center)
    memo = {}
    total = 0.0
    diffs = [origin1[ax] - origin2[ax] for ax in range(3)]
    for t in range(lmn1[0] + lmn2[0] + 1):
        et = hermite_expansion(lmn1[0], lmn2[0], t, diffs[0], a, b)
        for u in range(lmn1[1] + lmn2[1] + 1):
            eu = hermite_expansion(lmn1[1], lmn2[1], u, diffs[1], a, b)
            for v in range(lmn1[2] + lmn2[2] + 1):
                ev = hermite_expansion(lmn1[2], lmn2[2], v, diffs[2], a, b)
                total += et * eu * ev * hermite_coulomb(t, u, v, 0, p, pc, memo)
    return 2.0 * math.pi / p * total


def eri_prim(a, lmn1, o1, b, lmn2, o2, c, lmn3, o3, d, lmn4, o4):
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    big_p = (a * np.asarray(o1) + b * np.asarray(o2)) / p
    big_q = (c * np.asarray(o3) + d * np.asarray(o4)) / q
    pq = big_p - big_q
    memo = {}
    d1 = [o1[ax] - o2[ax] for ax in range(3)]
    d2 = [o3[ax] - o4[ax] for ax in range(3)]
    total = 0.0
    for t in range(lmn1[0] + lmn2[0] + 1):
        e1t = hermite_expansion(lmn1[0], lmn2[0], t, d1[0], a, b)
        for u in range(lmn1[1] + lmn2[1] + 1):
            e1u = hermite_expansion(lmn1[1], lmn2[1], u, d1[1], a, b)
            for v in range(lmn1[2] + lmn2[2] + 1):
                e1v = hermite_expansion(lmn1[2], lmn2[2], v, d1[2], a, b)
                left = e1t * e1u * e1v
                if left == 0.0:
                    continue
                for tt in range(lmn3[0] + lmn4[0] + 1):
                    e2t = hermite_expansion(lmn3[0], lmn4[0], tt, d2[0], c, d)
                    for uu in range(lmn3[1] + lmn4[1] + 1):
                        e2u = hermite_expansion(lmn3[1], lmn4[1], uu, d2[1], c, d)
                        for vv in range(lmn3[2] + lmn4[2] + 1):
                            e2v = hermite_expansion(
                                lmn3[2], lmn4[2], vv, d2[2], c, d
                            )
                            right = e2t * e2u * e2v
                            if right == 0.0:
                                continue
                            total += (
                                left
                                * right
                                * (-1.0) ** (tt + uu + vv)
                                * hermite_coulomb(
                                    t + tt, u + uu, v + vv, 0, alpha, pq, memo
                                )
                            )
    return total * 2.0 * math.pi ** 2.5 / (p * q * math.sqrt(p + q))


def double_factorial(n):
    return math.prod(range(n, 0, -2)) if n > 0 else 1


class BasisFunction:
    def __init__(self, origin, lmn, exponents, coefficients):
        self.origin = tuple(origin)
        self.lmn = tuple(lmn)
        self.exponents = list(exponents)
        norms = [
            (2 * alpha / math.pi) ** 0.75
            * (4 * alpha) ** (sum(lmn) / 2.0)
            / math.sqrt(
                double_factorial(2 * lmn[0] - 1)
                * double_factorial(2 * lmn[1] - 1)
                * double_factorial(2 * lmn[2] - 1)
            )
            for alpha in exponents
        ]
        coeffs = [c * n for c, n in zip(coefficients, norms)]
        self_overlap = sum(
            ci * cj * overlap_prim(ai, self.lmn, self.origin, aj, self.lmn, self.origin)
            for ai, ci in zip(exponents, coeffs)
            for aj, cj in zip(exponents, coeffs)
        )
        self.coefficients = [c / math.sqrt(self_overlap) for c in coeffs]


def build_basis(geometry):
    """geometry: list of (element, xyz_bohr). Returns basis function list."""
    basis = []
    for element, center in geometry:
        for shell in STO3G[element]:
            if shell[0] == "s":
                _, exps, coeffs = shell
                basis.append(BasisFunction(center, (0, 0, 0), exps, coeffs))
            else:
                _, exps, s_coeffs, p_coeffs = shell
                basis.append(BasisFunction(center, (0, 0, 0), exps, s_coeffs))
                for lmn in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
                    basis.append(BasisFunction(center, lmn, exps, p_coeffs))
    return basis


def contracted(prim_fn, f1, f2, *extra):
    total = 0.0
    if not extra:
        for a, ca in zip(f1.exponents, f1.coefficients):
            for b, cb in zip(f2.exponents, f2.coefficients):
                total += ca * cb * prim_fn(a, f1.lmn, f1.origin, b, f2.lmn, f2.origin)
        return total
    f3, f4 = extra
    for a, ca in zip(f1.exponents, f1.coefficients):
        for b, cb in zip(f2.exponents, f2.coefficients):
            for c, cc in zip(f3.exponents, f3.coefficients):
                for d, cd in zip(f4.exponents, f4.coefficients):
                    total += ca * cb * cc * cd * prim_fn(
                        a, f1.lmn, f1.origin,
                        b, f2.lmn, f2.origin,
                        c, f3.lmn, f3.origin,
                        d, f4.lmn, f4.origin,
                    )
    return total


def ao_integrals(geometry):
    basis = build_basis(geometry)
    n = len(basis)
    overlap = np.zeros((n, n))
    kinetic = np.zeros((n, n))
    nuclear = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            overlap[i, j] = overlap[j, i] = contracted(overlap_prim, basis[i], basis[j])
            kinetic[i, j] = kinetic[j, i] = contracted(kinetic_prim, basis[i], basis[j])
            v = 0.0
            for element, center in geometry:
                v -= CHARGE[element] * contracted(
                    lambda a, l1, o1, b, l2, o2: nuclear_prim(a, l1, o1, b, l2, o2, center),
                    basis[i],
                    basis[j],
                )
            nuclear[i, j] = nuclear[j, i] = v

    eri = np.zeros((n, n, n, n))
    pair_index = lambda i, j: i * (i + 1) // 2 + j
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if pair_index(i, j) < pair_index(k, l):
                        continue
                    value = contracted(eri_prim, basis[i], basis[j], basis[k], basis[l])
                    for p, q in ((i, j), (j, i)):
                        for r, s in ((k, l), (l, k)):
                            eri[p, q, r, s] = value
                            eri[r, s, p, q] = value

    e_nuc = 0.0
    for (el1, c1), (el2, c2) in itertools.combinations(geometry, 2):
        e_nuc += CHARGE[el1] * CHARGE[el2] / float(
            np.linalg.norm(np.asarray(c1) - np.asarray(c2))
        )
    return overlap, kinetic, nuclear, eri, e_nuc


# --- restricted Hartree-Fock --------------------------------------------------


def restricted_hartree_fock(overlap, hcore, eri, e_nuc, n_electrons,
                            max_iter=300, conv=1e-11):
    n_occ = n_electrons // 2
    evals, evecs = np.linalg.eigh(overlap)
    if np.min(evals) < 1e-10:
        raise RuntimeError("near-singular overlap matrix")
    x = evecs @ np.diag(evals ** -0.5) @ evecs.T

    fock = hcore.copy()
    energy = 0.0
    fock_history, error_history = [], []
    for iteration in range(max_iter):
        f_prime = x @ fock @ x
        _, c_prime = np.linalg.eigh(f_prime)
        mo_coeff = x @ c_prime
        occ = mo_coeff[:, :n_occ]
        density = 2.0 * occ @ occ.T
        coulomb = np.einsum("pqrs,rs->pq", eri, density)
        exchange = np.einsum("prqs,rs->pq", eri, density)
        fock = hcore + coulomb - 0.5 * exchange
        new_energy = 0.5 * np.sum(density * (hcore + fock)) + e_nuc

        diis_error = fock @ density @ overlap - overlap @ density @ fock
        error_norm = np.max(np.abs(diis_error))
        if error_norm < conv and abs(new_energy - energy) < 1e-12:
            return new_energy, mo_coeff, np.linalg.eigvalsh(f_prime)
        energy = new_energy

        fock_history.append(fock)
        error_history.append(diis_error)
        if len(fock_history) > 8:
            fock_history.pop(0)
            error_history.pop(0)
        if len(fock_history) >= 2:
            k = len(fock_history)
            b = -np.ones((k + 1, k + 1))
            b[k, k] = 0.0
            for i in range(k):
                for j in range(k):
                    b[i, j] = np.sum(error_history[i] * error_history[j])
            rhs = np.zeros(k + 1)
            rhs[k] = -1.0
            try:
                weights = np.linalg.solve(b, rhs)[:k]
                fock = sum(w * f for w, f in zip(weights, fock_history))
            except np.linalg.LinAlgError:
                pass
    raise RuntimeError("SCF did not converge")


def mo_transform(hcore, eri, mo_coeff):
    h_mo = mo_coeff.T @ hcore @ mo_coeff
    g_mo = np.einsum(
        "pi,qj,rk,sl,pqrs->ijkl",
        mo_coeff, mo_coeff, mo_coeff, mo_coeff, eri, optimize=True,
    )
    return h_mo, g_mo


# --- determinant full CI -------------------------------------------------------


def _parity(mask):
    return -1 if bin(mask).count("1") % 2 else 1


def _excite(mask, hole, particle):
    sign = _parity(mask & ((1 << hole) - 1))
    mask ^= 1 << hole
    sign *= _parity(mask & ((1 << particle) - 1))
    return mask | (1 << particle), sign


def determinant_ci(h_mo, g_mo, core, m, n_alpha, n_beta,
                   frozen=(), discarded=()):
    """Full CI over determinants; returns (eigenvalues, determinant masks).

    ``frozen`` spatial orbitals are doubly occupied in every determinant,
    ``discarded`` ones never occupied.  Spin orbitals use blocked order
    (alpha p -> bit p, beta p -> bit p + m).  Two-electron integrals stay
    in chemist notation; the physicist element <ij|kl> used by the
    Slater-Condon rules is (p_i p_k | p_j p_l) with matching spins.
    """
    frozen = set(frozen)
    discarded = set(discarded)
    movable = [p for p in range(m) if p not in frozen and p not in discarded]

    def spin_choices(count):
        extra = count - len(frozen)
        if extra < 0:
            raise ValueError("frozen orbitals exceed electron count")
        return [
            tuple(sorted(frozen | set(choice)))
            for choice in itertools.combinations(movable, extra)
        ]

    dets = []
    for alpha in spin_choices(n_alpha):
        mask_a = sum(1 << p for p in alpha)
        for beta in spin_choices(n_beta):
            dets.append(mask_a | sum(1 << (p + m) for p in beta))

    def spatial(i):
        return i % m

    def same_spin(i, j):
        return (i < m) == (j < m)

    def phys(i, j, k, l):
        # <ij|kl>
        if not same_spin(i, k) or not same_spin(j, l):
            return 0.0
        return g_mo[spatial(i), spatial(k), spatial(j), spatial(l)]

    def occ_list(mask):
        return [i for i in range(2 * m) if mask >> i & 1]

    def element(m1, m2):
        diff = m1 ^ m2
        degree = bin(diff).count("1") // 2
        if degree > 2:
            return 0.0
        occ1 = occ_list(m1)
        if degree == 0:
            value = core
            for i in occ1:
                value += h_mo[spatial(i), spatial(i)]
            for i in occ1:
                for j in occ1:
                    value += 0.5 * (phys(i, j, i, j) - phys(i, j, j, i))
            return value
        if degree == 1:
            hole = occ_list(m1 & diff)[0]
            particle = occ_list(m2 & diff)[0]
            _, sign = _excite(m1, hole, particle)
            if not same_spin(hole, particle):
                return 0.0
            value = h_mo[spatial(particle), spatial(hole)]
            for j in occ1:
                if j != hole:
                    value += phys(particle, j, hole, j) - phys(particle, j, j, hole)
            return sign * value
        h1, h2 = occ_list(m1 & diff)
        p1, p2 = occ_list(m2 & diff)
        intermediate, sign1 = _excite(m1, h1, p1)
        _, sign2 = _excite(intermediate, h2, p2)
        value = phys(p1, p2, h1, h2) - phys(p1, p2, h2, h1)
        return sign1 * sign2 * value

    dim = len(dets)
    matrix = np.zeros((dim, dim))
    for a in range(dim):
        for b in range(a, dim):
            matrix[a, b] = matrix[b, a] = element(dets[a], dets[b])
    return np.linalg.eigvalsh(matrix), dets, matrix


# --- self-checks --------------------------------------------------------------


def dense_ladder(index, creation, n_modes):
    dim = 1 << n_modes
    mat = np.zeros((dim, dim))
    bit = 1 << index
    for k in range(dim):
        sign = (-1) ** ((k & (bit - 1)).bit_count())
        if creation and not k & bit:
            mat[k | bit, k] = sign
        elif not creation and k & bit:
            mat[k ^ bit, k] = sign
    return mat


def dense_hamiltonian(h_mo, g_mo, core, m):
    n = 2 * m
    dim = 1 << n
    total = core * np.eye(dim)
    ladders = {
        (i, dag): dense_ladder(i, dag, n)
        for i in range(n)
        for dag in (False, True)
    }
    for p in range(m):
        for q in range(m):
            if abs(h_mo[p, q]) < 1e-14:
                continue
            for sigma in (0, m):
                total += h_mo[p, q] * ladders[p + sigma, True] @ ladders[q + sigma, False]
    for p, q, r, s in np.ndindex(m, m, m, m):
        val = g_mo[p, q, r, s]
        if abs(val) < 1e-14:
            continue
        for sigma in (0, m):
            for tau in (0, m):
                i, j, k, l = p + sigma, r + tau, s + tau, q + sigma
                if i == j or k == l:
                    continue
                total += 0.5 * val * (
                    ladders[i, True] @ ladders[j, True]
                    @ ladders[k, False] @ ladders[l, False]
                )
    return total


def check_ci_against_dense(h_mo, g_mo, core, m, n_alpha, n_beta):
    ci_vals, _, _ = determinant_ci(h_mo, g_mo, core, m, n_alpha, n_beta)
    dense = dense_hamiltonian(h_mo, g_mo, core, m)
    alpha_mask = (1 << m) - 1
    sector = [
        k
        for k in range(1 << (2 * m))
        if (k & alpha_mask).bit_count() == n_alpha
        and (k >> m).bit_count() == n_beta
    ]
    sector_vals = np.linalg.eigvalsh(dense[np.ix_(sector, sector)])
    if not np.allclose(ci_vals, sector_vals, atol=1e-9):
        raise AssertionError("determinant CI disagrees with dense Fock-space build")


def run_selfchecks():
    rng = np.random.default_rng(2024)
    m = 3
    h = rng.normal(size=(m, m))
    h = 0.5 * (h + h.T)
    raw = rng.normal(size=(m, m, m, m))
    g = np.zeros_like(raw)
    for p, q, r, s in np.ndindex(m, m, m, m):
        g[p, q, r, s] = np.mean(
            [
                raw[p, q, r, s], raw[q, p, r, s], raw[p, q, s, r], raw[q, p, s, r],
                raw[r, s, p, q], raw[s, r, p, q], raw[r, s, q, p], raw[s, r, q, p],
            ]
        )
    for n_alpha, n_beta in ((1, 1), (2, 1), (2, 2)):
        check_ci_against_dense(h, g, 0.37, m, n_alpha, n_beta)
    print("selfcheck: determinant CI matches dense Fock-space spectra")


# --- fixture generation ---------------------------------------------------------


def molecule_geometry(name, bond_angstrom):
    r = bond_angstrom / ANGSTROM_PER_BOHR
    if name == "h2":
        return [("H", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))], 2
    if name == "lih":
        return [("Li", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))], 4
    if name == "beh2":
        return [
            ("H", (0.0, 0.0, -r)),
            ("Be", (0.0, 0.0, 0.0)),
            ("H", (0.0, 0.0, r)),
        ], 6
    raise ValueError(name)


def fcidump_text(h_mo, g_mo, core, n_electrons):
    m = h_mo.shape[0]
    lines = [
        f"&FCI NORB={m},NELEC={n_electrons},MS2=0,",
        " ORBSYM=" + "1," * m,
        " ISYM=1,",
        "&END",
    ]
    pair = lambda i, j: i * (i + 1) // 2 + j

    for p in range(m):
        for q in range(p + 1):
            for r in range(m):
                for s in range(r + 1):
                    if pair(p, q) < pair(r, s):
                        continue
                    value = g_mo[p, q, r, s]
                    if abs(value) > 1e-12:
                        lines.append(
                            f"{value:.16e} {p + 1} {q + 1} {r + 1} {s + 1}"
                        )
    for p in range(m):
        for q in range(p + 1):
            if abs(h_mo[p, q]) > 1e-12:
                lines.append(f"{h_mo[p, q]:.16e} {p + 1} {q + 1} 0 0")
    lines.append(f"{core:.16e} 0 0 0 0")
    return "\n".join(lines) + "\n"


ACTIVE_SPACES = {
    "lih": {"freeze": [0], "discard": [4, 5]},
    "beh2": {"freeze": [0], "discard": [5, 6]},
}


def generate(outdir: Path, skip_selfcheck=False):
    outdir.mkdir(parents=True, exist_ok=True)
    if not skip_selfcheck:
        run_selfchecks()

    targets = [("h2", d) for d in (0.5, 0.6, 0.7414, 0.9, 1.1, 1.5)]
    targets += [("lih", 1.55), ("beh2", 1.33)]

    references = {}
    manifest = {"format": "sha256", "files": {}}
    for name, distance in targets:
        geometry, n_electrons = molecule_geometry(name, distance)
        overlap, kinetic, nuclear, eri, e_nuc = ao_integrals(geometry)
        hcore = kinetic + nuclear
        scf_energy, mo_coeff, _ = restricted_hartree_fock(
            overlap, hcore, eri, e_nuc, n_electrons
        )
        h_mo, g_mo = mo_transform(hcore, eri, mo_coeff)
        m = h_mo.shape[0]
        n_occ = n_electrons // 2

        ci_vals, dets, matrix = determinant_ci(
            h_mo, g_mo, e_nuc, m, n_occ, n_occ
        )
        fci = float(ci_vals[0])

        hf_mask = sum(1 << p for p in range(n_occ))
        hf_mask |= sum(1 << (p + m) for p in range(n_occ))
        hf_idx = dets.index(hf_mask)
        if abs(matrix[hf_idx, hf_idx] - scf_energy) > 1e-9:
            raise AssertionError("CI diagonal disagrees with SCF energy")
        brillouin = 0.0
        for j, det in enumerate(dets):
            if bin(det ^ hf_mask).count("1") == 2:
                brillouin = max(brillouin, abs(matrix[hf_idx, j]))
        if brillouin > 1e-7:
            raise AssertionError("Brillouin violation: orbitals not canonical")
        if not fci <= scf_energy + 1e-12:
            raise AssertionError("FCI above SCF")

        key = f"{name}_{distance:.4f}"
        record = {
            "molecule": name,
            "bond_distance_angstrom": distance,
            "basis": "sto-3g",
            "n_spatial_orbitals": m,
            "n_electrons": n_electrons,
            "nuclear_repulsion": float(e_nuc),
            "scf_energy": float(scf_energy),
            "fci_energy": fci,
        }
        if name in ACTIVE_SPACES:
            spec_as = ACTIVE_SPACES[name]
            act_vals, _, _ = determinant_ci(
                h_mo, g_mo, e_nuc, m, n_occ, n_occ,
                frozen=spec_as["freeze"], discarded=spec_as["discard"],
            )
            record["active_space"] = {
                "freeze": spec_as["freeze"],
                "discard": spec_as["discard"],
                "fci_energy": float(act_vals[0]),
            }
        references[key] = record

        text = fcidump_text(h_mo, g_mo, e_nuc, n_electrons)
        path = outdir / f"{key}.fcidump"
        path.write_text(text)
        manifest["files"][path.name] = {
            "sha256": hashlib.sha256(text.encode()).hexdigest(),
            "molecule": name,
            "bond_distance_angstrom": distance,
        }
        print(f"{key}: scf={scf_energy:.8f}  fci={fci:.8f}  ({m} orbitals)")

    h2_ref = references["h2_0.7414"]
    if abs(h2_ref["scf_energy"] - (-1.1167)) > 1e-3:
        raise AssertionError("H2 SCF energy far from literature value")

    ref_path = outdir / "reference_energies.json"
    ref_path.write_text(json.dumps(references, indent=2, sort_keys=True) + "\n")
    manifest["files"][ref_path.name] = {
        "sha256": hashlib.sha256(ref_path.read_bytes()).hexdigest()
    }
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    print(f"wrote {len(targets)} fixtures to {outdir}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--outdir",
        type=Path,
        default=Path(__file__).resolve().parent.parent / "src" / "cdprep" / "fixtures",
    )
    parser.add_argument("--skip-selfcheck", action="store_true")
    args = parser.parse_args()
    generate(args.outdir, skip_selfcheck=args.skip_selfcheck)


if __name__ == "__main__":
    main()
