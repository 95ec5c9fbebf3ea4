"""Composed approximate erasure codes and their exact decoding pipeline.

Encoding composes the key-superposed detection code with an outer
stabilizer code: the detection encoder's output register becomes the
outer code's message register.

Decoding is exact branch enumeration, never sampling:

1. the adversary acts (one branch per Kraus operator, each tagged with
   its erased set; erased qubits are refilled with halves of fresh
   maximally entangled pairs so every branch stays pure);
2. the outer syndrome measurement is expanded over all outcomes with
   nonzero probability;
3. for each outcome, the candidate-correction list drives a coherent
   flag cascade: revert the first candidate, run the detection unitary,
   and, controlled on failure flags, step through the remaining
   candidates.

Register layout per branch vector (little-endian qubit indices):
[outer code block | reference | environment pairs | flags].  The
message occupies the lowest qubits of the code block after decoding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densesim import (apply_circuit, apply_on_qubits, apply_pauli,
                       maximally_entangled_overlap)
from .limits import check_qubits
from .pmd import PmdCode, auth_unitary
from .qlde import CorrectionList, erasure_list_decode
from .symplectic import CliffordCircuit, PauliOperator, StabilizerCode

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class ComposedCode:
    """Detection code nested inside an outer stabilizer code."""

    pmd: PmdCode
    outer: StabilizerCode

    def __post_init__(self):
        if self.outer.k != self.pmd.total:
            raise ValueError(
                f"outer code must encode {self.pmd.total} qubits, has k={self.outer.k}")
        check_qubits(self.outer.n + self.message_qubits, "compose")

    @property
    def n(self) -> int:
        return self.outer.n

    @property
    def message_qubits(self) -> int:
        return self.pmd.message_qubits

    def encoder_isometry(self) -> np.ndarray:
        from .densesim import codespace_isometry
        return codespace_isometry(self.outer) @ self.pmd.encoder


def compose(pmd: PmdCode, outer: StabilizerCode) -> ComposedCode:
    return ComposedCode(pmd, outer)


@dataclass(frozen=True)
class ErasureAdversary:
    """CP map whose Kraus branches each erase their own support.

    `branches` holds (kraus matrix on support, support) pairs; matrices
    act on the support register only.  `max_erased` is the declared
    per-branch erasure budget.
    """

    n: int
    branches: tuple[tuple[np.ndarray, tuple[int, ...]], ...]
    max_erased: int
    mode: str = "adaptive"

    def __post_init__(self):
        if self.mode not in ("adaptive", "nonadaptive"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "nonadaptive" and len(self.branches) != 1:
            raise ValueError("a nonadaptive adversary has exactly one erased set")
        total = np.zeros((1 << self.n, 1 << self.n), dtype=complex)
        norm_branches = []
        for mat, support in self.branches:
            support = tuple(sorted(support))
            if len(support) > self.max_erased:
                raise ValueError(
                    f"branch erases {len(support)} qubits, budget is {self.max_erased}")
            if any(not 0 <= q < self.n for q in support):
                raise ValueError(f"support {support} outside the block")
            mat = np.asarray(mat, dtype=complex)
            if mat.shape != (1 << len(support),) * 2:
                raise ValueError("Kraus shape does not match support size")
            embedded = _embed_operator(mat, support, self.n)
            total += embedded.conj().T @ embedded
            norm_branches.append((mat, support))
        if not np.allclose(total, np.eye(1 << self.n), atol=1e-10):
            raise ValueError("adversary branches are not trace preserving")
        object.__setattr__(self, "branches", tuple(norm_branches))

    @classmethod
    def nonadaptive(cls, n: int, erased: tuple[int, ...]) -> "ErasureAdversary":
        dim = 1 << len(erased)
        return cls(n, ((np.eye(dim, dtype=complex), tuple(erased)),),
                   max_erased=max(len(erased), 0), mode="nonadaptive")

    @classmethod
    def identity(cls, n: int) -> "ErasureAdversary":
        return cls.nonadaptive(n, ())


def _embed_operator(mat: np.ndarray, support: tuple[int, ...], n: int) -> np.ndarray:
    out = np.eye(1 << n, dtype=complex)
    return apply_on_qubits(mat, support, out, n) if support else mat * out


@dataclass(frozen=True)
class TaggedBranch:
    """A pure branch with its weight and the erased set the decoder sees."""

    weight: float
    vector: np.ndarray
    erased: tuple[int, ...]

    @property
    def n_qubits(self) -> int:
        return self.vector.shape[0].bit_length() - 1


def _erase_qubits(vec: np.ndarray, erased: tuple[int, ...], n_now: int) -> np.ndarray:
    """Move erased contents to fresh environment qubits and refill each
    position with half of a maximally entangled pair (purified mixing)."""
    out = vec
    for idx, q in enumerate(erased):
        base = n_now + 2 * idx
        bigger = np.zeros(out.shape[0] * 4, dtype=complex)
        bigger[: out.shape[0]] = out
        gates = [("cnot", (q, base)), ("cnot", (base, q)), ("cnot", (q, base)),
                 ("h", (q,)), ("cnot", (q, base + 1))]
        out = apply_circuit(CliffordCircuit(n_now + 2 * (idx + 1), tuple(gates)), bigger)
    return out


def apply_adversary(state: np.ndarray, adv: ErasureAdversary,
                    n_qubits: int) -> list[TaggedBranch]:
    """One tagged branch per Kraus operator; erased qubits purified away.

    `state` lives on n_qubits >= adv.n; the adversary acts on the low
    adv.n qubits (the code block), extra registers ride along.
    """
    branches = []
    for mat, support in adv.branches:
        if support:
            hit = apply_on_qubits(mat, support, state, n_qubits)
        else:
            hit = mat[0, 0] * state if mat.shape == (1, 1) else state.copy()
        weight = float(np.vdot(hit, hit).real)
        if weight <= WEIGHT_TOL:
            continue
        hit = hit / np.sqrt(weight)
        hit = _erase_qubits(hit, support, n_qubits)
        branches.append(TaggedBranch(weight, hit, support))
    return branches


# ---------------------------------------------------------------------------
# Algorithm: coherent correction cascade
# ---------------------------------------------------------------------------

class CorrectionCascade:
    """The coherent correction unitary for a fixed candidate list.

    Acts on the outer code block plus one flag qubit per candidate:
    revert candidate 1, un-encode the outer code, run the detection
    unitary onto flag 1; then for each further candidate, controlled on
    the previous flag being 0, switch corrections and authenticate onto
    the next flag (a previous success just cascades 1s down the flags).
    """

    def __init__(self, corrections: CorrectionList, code: ComposedCode):
        if not corrections.entries:
            raise ValueError("cascade needs a nonempty correction list")
        self.code = code
        self.entries = corrections.entries
        self.length = len(self.entries)
        check_qubits(code.n + self.length, "algorithm2_unitary")
        self._auth = auth_unitary(code.pmd)
        self._outer_dec = code.outer.encoder.inverse()
        # Switch operators in the decoded frame: candidate i -> i+1.
        self._switches = []
        for i in range(self.length - 1):
            step = self.entries[i + 1].inverse().mul(self.entries[i])
            self._switches.append(self._outer_dec.conjugate_pauli(step))

    def apply(self, vec: np.ndarray, n_qubits: int, flag_base: int) -> np.ndarray:
        """Run the cascade; flags occupy [flag_base, flag_base+L), all |0>."""
        pmd_qubits = tuple(range(self.code.pmd.total))
        out = _apply_pauli_on_block(self.entries[0].inverse(), vec, n_qubits)
        out = _apply_circuit_on_block(self._outer_dec, out, n_qubits)
        out = apply_on_qubits(self._auth, pmd_qubits + (flag_base,), out, n_qubits)
        for i in range(1, self.length):
            prev_flag = flag_base + i - 1
            this_flag = flag_base + i
            out = _apply_controlled_pauli(out, n_qubits, prev_flag, 0,
                                          self._switches[i - 1])
            out = _apply_controlled_auth(out, n_qubits, prev_flag, self._auth,
                                         pmd_qubits, this_flag)
        return out

    def dense(self) -> np.ndarray:
        total = self.code.n + self.length
        check_qubits(total, "cascade dense matrix", limit=11)
        eye = np.eye(1 << total, dtype=complex)
        cols = self.apply(eye, total, self.code.n)
        return cols


def _apply_pauli_on_block(p: PauliOperator, vec: np.ndarray, n_qubits: int) -> np.ndarray:
    wide = PauliOperator(n_qubits, p.x, p.z, p.phase)
    return apply_pauli(wide, vec)


def _apply_circuit_on_block(circ: CliffordCircuit, vec: np.ndarray,
                            n_qubits: int) -> np.ndarray:
    wide = CliffordCircuit(n_qubits, circ.gates)
    return apply_circuit(wide, vec)


def _flag_masks(n_qubits: int, flag: int):
    idx = np.arange(1 << n_qubits)
    hot = ((idx >> flag) & 1).astype(bool)
    return ~hot, hot


def _masked(vec: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return vec * (mask if vec.ndim == 1 else mask[:, None])


def _apply_controlled_pauli(vec: np.ndarray, n_qubits: int, control: int,
                            control_val: int, p: PauliOperator) -> np.ndarray:
    cold, hot = _flag_masks(n_qubits, control)
    active = cold if control_val == 0 else hot
    # The Pauli never touches the control qubit, so it maps the active
    # subspace to itself and the inactive part rides along unchanged.
    return _apply_pauli_on_block(p, _masked(vec, active), n_qubits) \
        + _masked(vec, ~active)


def _apply_controlled_auth(vec: np.ndarray, n_qubits: int, control: int,
                           auth: np.ndarray, pmd_qubits: tuple[int, ...],
                           target_flag: int) -> np.ndarray:
    cold, hot = _flag_masks(n_qubits, control)
    out = apply_on_qubits(auth, pmd_qubits + (target_flag,), _masked(vec, cold),
                          n_qubits)
    # Control 1: just increment the cascade by flipping the next flag.
    x_flag = PauliOperator(n_qubits, 1 << target_flag, 0, 0)
    return out + apply_pauli(x_flag, _masked(vec, hot))


def algorithm2_unitary(corrections: CorrectionList, code: ComposedCode) -> CorrectionCascade:
    return CorrectionCascade(corrections, code)


def algorithm1_decode(branch: TaggedBranch, code: ComposedCode,
                      prob_tol: float = 1e-12) -> tuple[list[TaggedBranch], int]:
    """Measure the outer syndrome exactly, list-decode, run the cascade.

    Returns (decoded branches, max list length over realized outcomes).
    A zero-probability-free outcome with an empty correction list is an
    invariant violation and raises.
    """
    n_now = branch.n_qubits
    outer = code.outer
    max_list = 0
    decoded = []
    for outcome in range(1 << outer.r):
        post = branch.vector
        for i, g in enumerate(outer.gens):
            want = (outcome >> i) & 1
            post = 0.5 * (post + (1 - 2 * want) * _apply_pauli_on_block(g, post, n_now))
        prob = float(np.vdot(post, post).real)
        if prob <= prob_tol:
            continue
        post = post / np.sqrt(prob)
        s_bits = tuple((outcome >> i) & 1 for i in range(outer.r))
        corrections = erasure_list_decode(outer, branch.erased, s_bits)
        if not corrections.entries:
            raise RuntimeError(
                f"syndrome {s_bits} has probability {prob:.3e} but no supported "
                "correction; erasure bookkeeping is inconsistent")
        max_list = max(max_list, len(corrections.entries))
        cascade = CorrectionCascade(corrections, code)
        flags = len(corrections.entries)
        widened = np.zeros(post.shape[0] << flags, dtype=complex)
        widened[: post.shape[0]] = post
        result = cascade.apply(widened, n_now + flags, n_now)
        decoded.append(TaggedBranch(branch.weight * prob, result, branch.erased))
    return decoded, max_list


# ---------------------------------------------------------------------------
# End-to-end harness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HarnessReport:
    fidelity: float
    epsilon: float
    realized_list: int
    bound: float
    passed: bool
    branch_count: int


def entangled_code_state(code: ComposedCode) -> np.ndarray:
    """Encoded half of a maximally entangled message-reference pair.

    Code block on qubits [0, n), reference on [n, n + k_msg).
    """
    iso = code.encoder_isometry()
    k = code.message_qubits
    vec = np.zeros((1 << code.n) * (1 << k), dtype=complex)
    for m in range(1 << k):
        offset = m << code.n
        vec[offset:offset + (1 << code.n)] += iso[:, m]
    vec /= np.sqrt(1 << k)
    return vec


def erasure_harness(code: ComposedCode, adv: ErasureAdversary,
                    epsilon: float) -> HarnessReport:
    """Entanglement fidelity of decode(adversary(encode)) vs the bound
    1 - 3 * epsilon^(1/2) * L^(3/4) with the realized list length."""
    if adv.n != code.n:
        raise ValueError("adversary block length does not match the code")
    k = code.message_qubits
    state = entangled_code_state(code)
    n_state = code.n + k
    tagged = apply_adversary(state, adv, n_state)
    final = []
    realized = 1
    for branch in tagged:
        decoded, max_list = algorithm1_decode(branch, code)
        realized = max(realized, max_list)
        final.extend(decoded)
    msg = tuple(range(k))
    ref = tuple(range(code.n, code.n + k))
    fidelity = sum(b.weight * maximally_entangled_overlap([(1.0, b.vector)], msg, ref)
                   for b in final)
    bound = float(1.0 - 3.0 * np.sqrt(epsilon) * realized ** 0.75)
    return HarnessReport(float(fidelity), float(epsilon), realized, bound,
                         passed=bool(fidelity >= bound - 1e-9),
                         branch_count=len(final))


def random_adversary(n: int, budget: int, rng: np.random.Generator) -> ErasureAdversary:
    """A seeded adaptive adversary within the erasure budget.

    Mixes three shapes: unitary corruption of a random support, a
    probabilistic split between two supports, and measure-then-erase.
    """
    def haar(dim):
        m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        q, r = np.linalg.qr(m)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    budget = max(1, budget)
    shape = int(rng.integers(3))
    size = int(rng.integers(1, budget + 1))
    support = tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))
    if shape == 0:
        return ErasureAdversary(n, ((haar(1 << size), support),), budget)
    if shape == 1:
        other = tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))
        p = float(rng.uniform(0.1, 0.9))
        return ErasureAdversary(
            n, ((np.sqrt(p) * haar(1 << size), support),
                (np.sqrt(1 - p) * haar(1 << size), other)), budget)
    # measure a qubit in a random basis, then erase it
    q = support[0]
    u = haar(2)
    k0 = u @ np.diag([1, 0]).astype(complex) @ u.conj().T
    k1 = u @ np.diag([0, 1]).astype(complex) @ u.conj().T
    return ErasureAdversary(n, ((k0, (q,)), (k1, (q,))), budget)
