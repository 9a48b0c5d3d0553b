"""Exact algebra over n-qubit Pauli operators.

A Pauli word is encoded symplectically as a pair of bitmasks: bit p of
``x_mask`` marks an X component on qubit p, bit p of ``z_mask`` a Z
component, both bits together a Y.  The unit phase of every word is fixed
by Y = iXZ, so the matrix of a word is

    i**popcount(x & z) * kron(..., X**x_p Z**z_p, ...)

and products, commutators and traces reduce to bit arithmetic on the
masks.  No dense matrix is ever built outside :func:`to_dense_matrix`.

Conventions (normative for the whole package):

* qubit 0 is the least significant bit of a computational basis index;
* a word prints as the factor string ``P_{n-1} ... P_0``;
* sums iterate deterministically, sorted by ``(z_mask, x_mask)``.
"""

from __future__ import annotations

from typing import Iterable, Iterator

__all__ = [
    "PauliWord",
    "PauliSum",
    "pauli_mul",
    "commutator",
    "trace_inner_product",
    "simplify",
    "weight_filter",
    "to_dense_matrix",
    "DROP_TOL",
    "DENSE_QUBIT_LIMIT",
]

DROP_TOL = 1e-12
DENSE_QUBIT_LIMIT = 12

_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)
_LETTERS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_MASKS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


class PauliWord:
    """A single tensor product of Pauli factors, phase-free by definition.

    Equality and hashing use only ``(x_mask, z_mask, n_qubits)``; any
    phase produced by arithmetic lives in the coefficients of the
    enclosing :class:`PauliSum`.
    """

    __slots__ = ("x_mask", "z_mask", "n_qubits")

    def __init__(self, x_mask: int, z_mask: int, n_qubits: int):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        full = (1 << n_qubits) - 1
        if x_mask & ~full or z_mask & ~full:
            raise ValueError("mask exceeds qubit count")
        self.x_mask = x_mask
        self.z_mask = z_mask
        self.n_qubits = n_qubits

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliWord":
        return cls(0, 0, n_qubits)

    @classmethod
    def from_label(cls, label: str) -> "PauliWord":
        """Parse a string over {I,X,Y,Z}, qubit n-1 leftmost."""
        x = z = 0
        n = len(label)
        if n == 0:
            raise ValueError("empty label")
        for pos, ch in enumerate(label):
            try:
                xb, zb = _MASKS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {ch!r}") from None
            bit = n - 1 - pos
            x |= xb << bit
            z |= zb << bit
        return cls(x, z, n)

    def label(self) -> str:
        return "".join(
            _LETTERS[((self.x_mask >> p) & 1, (self.z_mask >> p) & 1)]
            for p in range(self.n_qubits - 1, -1, -1)
        )

    @property
    def weight(self) -> int:
        """Number of non-identity factors."""
        return (self.x_mask | self.z_mask).bit_count()

    def commutes_with(self, other: "PauliWord") -> bool:
        _check_match(self.n_qubits, other.n_qubits)
        anti = (self.x_mask & other.z_mask).bit_count() + (
            self.z_mask & other.x_mask
        ).bit_count()
        return anti % 2 == 0

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PauliWord)
            and self.x_mask == other.x_mask
            and self.z_mask == other.z_mask
            and self.n_qubits == other.n_qubits
        )

    def __hash__(self) -> int:
        return hash((self.x_mask, self.z_mask, self.n_qubits))

    def __repr__(self) -> str:
        return f"PauliWord({self.label()!r})"


def _check_match(n_a: int, n_b: int) -> None:
    if n_a != n_b:
        raise ValueError(f"qubit-count mismatch: {n_a} != {n_b}")


def pauli_mul(a: PauliWord, b: PauliWord) -> tuple[complex, PauliWord]:
    """Exact product: matrix(a) @ matrix(b) == phase * matrix(word).

    The returned phase is one of {1, i, -1, -i}.
    """
    _check_match(a.n_qubits, b.n_qubits)
    x3 = a.x_mask ^ b.x_mask
    z3 = a.z_mask ^ b.z_mask
    # i-exponent from re-normalising the Y factors, plus the (-1) signs
    # from commuting Z^z_a past X^x_b.
    k = (
        (a.x_mask & a.z_mask).bit_count()
        + (b.x_mask & b.z_mask).bit_count()
        - (x3 & z3).bit_count()
        + 2 * (a.z_mask & b.x_mask).bit_count()
    ) % 4
    return _PHASES[k], PauliWord(x3, z3, a.n_qubits)


class PauliSum:
    """A complex-weighted sum of :class:`PauliWord` terms.

    Internally a dict keyed by ``(x_mask, z_mask)``; insertion coalesces
    duplicates.  Iteration over :meth:`terms` is deterministic
    (lexicographic on ``(z_mask, x_mask)``) so downstream Trotter
    orderings and file dumps are reproducible.
    """

    __slots__ = ("n_qubits", "_terms")

    def __init__(
        self,
        n_qubits: int,
        terms: Iterable[tuple[PauliWord, complex]] = (),
    ):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        self.n_qubits = n_qubits
        self._terms: dict[tuple[int, int], complex] = {}
        for word, coeff in terms:
            self.add_term(word, coeff)

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits)

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> "PauliSum":
        word = PauliWord.from_label(label)
        return cls(word.n_qubits, [(word, coeff)])

    def add_term(self, word: PauliWord, coeff: complex) -> None:
        _check_match(self.n_qubits, word.n_qubits)
        key = (word.x_mask, word.z_mask)
        new = self._terms.get(key, 0.0) + complex(coeff)
        if new == 0:
            self._terms.pop(key, None)
        else:
            self._terms[key] = new

    def terms(self) -> Iterator[tuple[PauliWord, complex]]:
        """Yield (word, coefficient) in the canonical order."""
        for x, z in sorted(self._terms, key=lambda key: (key[1], key[0])):
            yield PauliWord(x, z, self.n_qubits), self._terms[(x, z)]

    def words(self) -> list[PauliWord]:
        return [word for word, _ in self.terms()]

    def coefficient(self, word: PauliWord) -> complex:
        _check_match(self.n_qubits, word.n_qubits)
        return self._terms.get((word.x_mask, word.z_mask), 0.0 + 0.0j)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[PauliWord, complex]]:
        return self.terms()

    def copy(self) -> "PauliSum":
        out = PauliSum(self.n_qubits)
        out._terms = dict(self._terms)
        return out

    def __add__(self, other: "PauliSum") -> "PauliSum":
        _check_match(self.n_qubits, other.n_qubits)
        out = self.copy()
        for key, coeff in other._terms.items():
            new = out._terms.get(key, 0.0) + coeff
            if new == 0:
                out._terms.pop(key, None)
            else:
                out._terms[key] = new
        return out

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1.0) * other

    def __mul__(self, scalar: complex) -> "PauliSum":
        out = PauliSum(self.n_qubits)
        if scalar != 0:
            out._terms = {k: scalar * c for k, c in self._terms.items()}
        return out

    __rmul__ = __mul__

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        """Operator product, fully expanded and coalesced."""
        _check_match(self.n_qubits, other.n_qubits)
        out = PauliSum(self.n_qubits)
        n = self.n_qubits
        for (xa, za), ca in self._terms.items():
            a = PauliWord(xa, za, n)
            for (xb, zb), cb in other._terms.items():
                phase, word = pauli_mul(a, PauliWord(xb, zb, n))
                out.add_term(word, phase * ca * cb)
        return out

    def adjoint(self) -> "PauliSum":
        out = PauliSum(self.n_qubits)
        out._terms = {k: c.conjugate() for k, c in self._terms.items()}
        return out

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return all(abs(c.imag) < tol for c in self._terms.values())

    def identity_coefficient(self) -> complex:
        return self._terms.get((0, 0), 0.0 + 0.0j)

    def max_weight(self) -> int:
        if not self._terms:
            return 0
        return max((x | z).bit_count() for x, z in self._terms)

    def mean_weight(self) -> float:
        if not self._terms:
            return 0.0
        return sum((x | z).bit_count() for x, z in self._terms) / len(self._terms)

    def __repr__(self) -> str:
        return f"PauliSum(n_qubits={self.n_qubits}, n_terms={len(self)})"


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    """[a, b] = ab - ba, expanded at the word level.

    Word pairs that commute contribute nothing and are skipped; for an
    anticommuting pair w1 w2 - w2 w1 = 2 w1 w2.
    """
    _check_match(a.n_qubits, b.n_qubits)
    out = PauliSum(a.n_qubits)
    n = a.n_qubits
    for (xa, za), ca in a._terms.items():
        for (xb, zb), cb in b._terms.items():
            anti = (xa & zb).bit_count() + (za & xb).bit_count()
            if anti % 2 == 0:
                continue
            phase, word = pauli_mul(PauliWord(xa, za, n), PauliWord(xb, zb, n))
            out.add_term(word, 2.0 * phase * ca * cb)
    return out


def trace_inner_product(a: PauliSum, b: PauliSum) -> complex:
    """Tr[A B] / 2**n via Pauli orthogonality (coincident words only)."""
    _check_match(a.n_qubits, b.n_qubits)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0.0 + 0.0j
    for key, coeff in small._terms.items():
        other = large._terms.get(key)
        if other is not None:
            total += coeff * other
    return total


def simplify(s: PauliSum, drop_tol: float = DROP_TOL) -> PauliSum:
    """Coalesced copy with coefficients below drop_tol removed."""
    if drop_tol < 0:
        raise ValueError("drop_tol must be nonnegative")
    out = PauliSum(s.n_qubits)
    out._terms = {k: c for k, c in s._terms.items() if abs(c) >= drop_tol and c != 0}
    return out


def weight_filter(s: PauliSum, max_weight: int) -> PauliSum:
    """Keep exactly the terms whose word weight is <= max_weight."""
    if max_weight < 0:
        raise ValueError("max_weight must be nonnegative")
    out = PauliSum(s.n_qubits)
    out._terms = {
        (x, z): c for (x, z), c in s._terms.items() if (x | z).bit_count() <= max_weight
    }
    return out


def to_dense_matrix(s: PauliSum):
    """Exact 2**n x 2**n matrix of the sum (testing oracle; n <= 12).

    Column action of one word:  W |col> = i**|x&z| (-1)**|z&col| |col^x>.
    """
    import numpy as np

    if s.n_qubits > DENSE_QUBIT_LIMIT:
        raise ValueError(
            f"dense lowering limited to {DENSE_QUBIT_LIMIT} qubits, got {s.n_qubits}"
        )
    dim = 1 << s.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for (x, z), coeff in s._terms.items():
        y_phase = _PHASES[(x & z).bit_count() % 4]
        signs = 1.0 - 2.0 * (np.bitwise_count(cols & z) & 1)
        out[cols ^ x, cols] += coeff * y_phase * signs
    return out


def to_text(s: PauliSum) -> str:
    """One term per line: ``<coeff_re> <coeff_im> <word>``, canonical order."""
    lines = [
        f"{coeff.real!r} {coeff.imag!r} {word.label()}" for word, coeff in s.terms()
    ]
    return "\n".join(lines) + ("\n" if lines else "")

def from_text(text: str, n_qubits: int | None = None) -> PauliSum:
    """Inverse of :func:`to_text`."""
    terms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected '<re> <im> <word>'")
        re_s, im_s, label = parts
        word = PauliWord.from_label(label)
        terms.append((word, complex(float(re_s), float(im_s))))
    if not terms:
        if n_qubits is None:
            raise ValueError("empty dump needs an explicit n_qubits")
        return PauliSum(n_qubits)
    n = n_qubits if n_qubits is not None else terms[0][0].n_qubits
    return PauliSum(n, terms)
