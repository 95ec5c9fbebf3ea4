"""Erasure list decoding for classical linear codes and stabilizer codes.

Classical: all error vectors supported on an erased coordinate set that
match a given syndrome, enumerated as a particular solution plus the
kernel of the column-restricted parity-check matrix.

Quantum: the candidate-correction list for an erased qubit set and a
measured syndrome.  One supported Pauli with the right syndrome is
found by a linear solve; the full list is its coset under the quotient
of the support-restricted normalizer by the support-restricted
stabilizer subgroup.  Entries are canonicalized to the lexicographically
least element of their stabilizer coset and the list is ordered by
symplectic vector, so downstream decoding is reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import f2
from .limits import SizeGuardError
from .symplectic import (PauliOperator, StabilizerCode, SyndromeVector,
                         css_from_classical)


@dataclass(frozen=True)
class ErasurePattern:
    """A set of erased qubit positions on a block of length n."""

    n: int
    erased: tuple[int, ...]

    def __post_init__(self):
        erased = tuple(sorted(self.erased))
        object.__setattr__(self, "erased", erased)
        if len(set(erased)) != len(erased):
            raise ValueError("duplicate erased positions")
        if erased and not (0 <= erased[0] and erased[-1] < self.n):
            raise ValueError(f"erased positions outside [0, {self.n})")

    @property
    def mask(self) -> int:
        m = 0
        for q in self.erased:
            m |= 1 << q
        return m


@dataclass(frozen=True)
class CorrectionList:
    """Logically distinct Pauli corrections sharing support and syndrome."""

    entries: tuple[PauliOperator, ...]
    code: StabilizerCode
    erased: tuple[int, ...]
    target: SyndromeVector


def _lex_key(vec: int, ncols: int):
    return tuple(f2.int_to_bits(vec, ncols))


# ---------------------------------------------------------------------------
# Classical
# ---------------------------------------------------------------------------

def _as_rows(h) -> tuple[list[int], int]:
    rows = [list(map(int, row)) for row in h]
    if not rows:
        raise ValueError("parity-check matrix needs at least one row")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError("ragged parity-check matrix")
    n = widths.pop()
    return [f2.bits_to_int(r) for r in rows], n


def classical_erasure_list_decode(h, erased, s) -> list[np.ndarray]:
    """All e with support inside `erased` and H e = s; [] if inconsistent."""
    rows, n = _as_rows(h)
    pattern = ErasurePattern(n, tuple(erased))
    s = list(map(int, s))
    if len(s) != len(rows):
        raise ValueError("syndrome length does not match check count")
    cols = pattern.erased
    restricted = [f2.bits_to_int([(row >> q) & 1 for q in cols]) for row in rows]
    particular = f2.solve(restricted, s, len(cols))
    if particular is None:
        return []
    kernel = f2.kernel_basis(restricted, len(cols))
    solutions = []
    for combo in range(1 << len(kernel)):
        v = particular
        for i, b in enumerate(kernel):
            if (combo >> i) & 1:
                v ^= b
        full = np.zeros(n, dtype=np.uint8)
        for i, q in enumerate(cols):
            full[q] = (v >> i) & 1
        solutions.append(full)
    solutions.sort(key=lambda e: tuple(e))
    return solutions


def classical_list_profile(h, delta: float) -> int:
    """Worst-case solution count over erased sets of size <= delta * n."""
    rows, n = _as_rows(h)
    budget = int(delta * n)
    worst = 1
    for size in range(budget + 1):
        for cols in itertools.combinations(range(n), size):
            restricted = [f2.bits_to_int([(row >> q) & 1 for q in cols])
                          for row in rows]
            nullity = size - f2.rank(restricted, size)
            worst = max(worst, 1 << nullity)
    return worst


# ---------------------------------------------------------------------------
# Quantum
# ---------------------------------------------------------------------------

def _restricted_commutation_rows(code: StabilizerCode, cols: tuple[int, ...]):
    """Per-generator functionals on (x|z) coordinates over the erased set."""
    rows = []
    for g in code.gens:
        bits = [(g.z >> q) & 1 for q in cols] + [(g.x >> q) & 1 for q in cols]
        rows.append(f2.bits_to_int(bits))
    return rows


def _embed_restricted(vec: int, cols: tuple[int, ...], n: int) -> PauliOperator:
    x = z = 0
    m = len(cols)
    for i, q in enumerate(cols):
        x |= ((vec >> i) & 1) << q
        z |= ((vec >> (i + m)) & 1) << q
    return PauliOperator(n, x, z, 0)


def _supported_stabilizer_basis(code: StabilizerCode, mask: int) -> list[int]:
    """Symplectic vectors of a basis of the stabilizer subgroup on the mask."""
    outside = [q for q in range(code.n) if not (mask >> q) & 1]
    # Constraint rows over generator-coefficient space: the combination
    # sum c_i g_i must have zero x and z bits at every outside qubit.
    rows = []
    for q in outside:
        rows.append(f2.bits_to_int([(g.x >> q) & 1 for g in code.gens]))
        rows.append(f2.bits_to_int([(g.z >> q) & 1 for g in code.gens]))
    combos = f2.kernel_basis(rows, code.r)
    basis = []
    for c in combos:
        v = 0
        for i in range(code.r):
            if (c >> i) & 1:
                v ^= code.gens[i].symplectic_vector()
        basis.append(v)
    return basis


def erasure_list_decode(code: StabilizerCode, erased, s: SyndromeVector,
                        guard: int = 4096) -> CorrectionList:
    """Candidate corrections on the erased set matching syndrome s.

    Entries pairwise logically distinct, each the lexicographic minimum
    of its stabilizer coset, ordered by symplectic vector.  Empty iff no
    supported Pauli has the requested syndrome.
    """
    pattern = ErasurePattern(code.n, tuple(erased))
    if isinstance(s, SyndromeVector):
        if s.r != code.r:
            raise ValueError("syndrome length does not match generator count")
    else:
        s = SyndromeVector.from_bits(s)
        if s.r != code.r:
            raise ValueError("syndrome length does not match generator count")
    cols = pattern.erased
    rows = _restricted_commutation_rows(code, cols)
    particular_vec = f2.solve(rows, list(s.as_tuple()), 2 * len(cols))
    if particular_vec is None:
        return CorrectionList((), code, cols, s)
    particular = _embed_restricted(particular_vec, cols, code.n)
    normalizer_vecs = [ _embed_restricted(v, cols, code.n).symplectic_vector()
                        for v in f2.kernel_basis(rows, 2 * len(cols))]
    stab_vecs = _supported_stabilizer_basis(code, pattern.mask)
    coset_gens = f2.extend_basis(stab_vecs, normalizer_vecs, 2 * code.n)
    if 1 << len(coset_gens) > guard:
        raise SizeGuardError(f"correction list would have 2^{len(coset_gens)} entries")
    stab_pivots, stab_rref = f2.rref(stab_vecs, 2 * code.n)
    entries = []
    seen = set()
    for combo in range(1 << len(coset_gens)):
        v = particular.symplectic_vector()
        for i, g in enumerate(coset_gens):
            if (combo >> i) & 1:
                v ^= g
        canonical = f2.reduce_vector(stab_pivots, stab_rref, v)
        if canonical in seen:  # pragma: no cover - cosets are distinct by construction
            continue
        seen.add(canonical)
        entries.append(PauliOperator.from_symplectic_vector(code.n, canonical)
                       .hermitian_form())
    entries.sort(key=lambda p: _lex_key(p.symplectic_vector(), 2 * code.n))
    return CorrectionList(tuple(entries), code, cols, s)


def quantum_list_size(code: StabilizerCode, erased) -> int:
    """|N_T / S_T| by symplectic rank arithmetic (no enumeration)."""
    pattern = ErasurePattern(code.n, tuple(erased))
    cols = pattern.erased
    rows = _restricted_commutation_rows(code, cols)
    dim_normalizer = 2 * len(cols) - f2.rank(rows, 2 * len(cols))
    dim_stabilizer = f2.rank(_supported_stabilizer_basis(code, pattern.mask),
                             2 * code.n)
    return 1 << (dim_normalizer - dim_stabilizer)


def list_size_profile(code: StabilizerCode, delta: float,
                      max_n: int = 12) -> int:
    """Worst |N_T / S_T| over erased sets of size <= delta * n."""
    if code.n > max_n:
        raise SizeGuardError(f"profile sweep limited to n <= {max_n}")
    budget = int(delta * code.n)
    worst = 1
    for size in range(budget + 1):
        for cols in itertools.combinations(range(code.n), size):
            worst = max(worst, quantum_list_size(code, cols))
    return worst


# ---------------------------------------------------------------------------
# Random CSS sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CssSampleReport:
    code: StabilizerCode
    first_draw_full_rank: bool
    redraws: int


def sample_random_css(n: int, k: int, rng: np.random.Generator,
                      max_redraws: int = 100) -> CssSampleReport:
    """Random CSS code of target dimensions [[n, k]].

    Draws (n+k)/2 uniform vectors as a generator matrix for the first
    classical code; the first (n-k)/2 of them double as the parity
    check of the second, which makes the dual-containment automatic.
    Dependent draws are retried wholesale (up to `max_redraws`); the
    report records whether the first draw was already full rank, which
    is the rate-failure event of interest for unconditioned sampling.
    """
    if (n + k) % 2 != 0:
        raise ValueError("n + k must be even")
    if not 0 <= k < n:
        raise ValueError("need 0 <= k < n")
    k1 = (n + k) // 2
    k2 = n - k1
    first_full_rank = None
    for attempt in range(max_redraws + 1):
        gs = [int(v) for v in rng.integers(0, 1 << n, size=k1, dtype=np.uint64)]
        full_rank = f2.rank(gs, n) == k1
        if first_full_rank is None:
            first_full_rank = full_rank
        if full_rank:
            h2 = [f2.int_to_bits(r, n) for r in gs[:k2]]
            h1 = [f2.int_to_bits(r, n) for r in f2.kernel_basis(gs, n)]
            code = css_from_classical(h1, h2, name=f"randcss[{n},{k}]")
            if code.k != k:  # pragma: no cover - guaranteed by rank checks
                raise AssertionError("sampled CSS code has the wrong dimension")
            return CssSampleReport(code, bool(first_full_rank), attempt)
    raise RuntimeError(f"no independent draw after {max_redraws} redraws")
