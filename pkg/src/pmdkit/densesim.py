"""Exact dense linear algebra for small-qubit verification.

Statevectors and operators are complex128 numpy arrays.  Basis-state
index bit j holds qubit j (little-endian), matching the bit-packed
Pauli convention in `symplectic`.

Mixed states appear only as weighted lists of pure branches
(`Branch` = (weight, vector)); density matrices are used nowhere above
a few qubits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import f2
from .limits import SizeGuardError, check_qubits
from .symplectic import CliffordCircuit, PauliOperator, StabilizerCode

ATOL = 1e-10

Branch = tuple[float, np.ndarray]

_I2 = np.eye(2, dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j]).astype(complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1, -1]).astype(complex)

GATE_MATRICES = {"h": _H, "s": _S, "x": _X, "z": _Z}


def _qubit_count(dim: int, what: str = "vector") -> int:
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise ValueError(f"{what} dimension {dim} is not a power of two")
    return n


# ---------------------------------------------------------------------------
# DenseState / DenseOperator contracts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DenseState:
    """A normalized statevector on n qubits."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", vec)
        if vec.shape != (1 << self.n,):
            raise ValueError(f"expected 2^{self.n} amplitudes, got shape {vec.shape}")
        if abs(np.linalg.norm(vec) - 1.0) > ATOL:
            raise ValueError("state is not normalized")


@dataclass(frozen=True)
class DenseOperator:
    """A complex matrix between qubit registers (possibly rectangular)."""

    entries: np.ndarray

    def __post_init__(self):
        mat = np.atleast_2d(np.asarray(self.entries, dtype=complex))
        object.__setattr__(self, "entries", mat)
        _qubit_count(mat.shape[0], "row")
        _qubit_count(mat.shape[1], "column")

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def is_isometry(self, atol: float = ATOL) -> bool:
        m = self.entries
        return np.allclose(m.conj().T @ m, np.eye(self.cols), atol=atol)

    def is_projector(self, atol: float = ATOL) -> bool:
        m = self.entries
        return (m.shape[0] == m.shape[1]
                and np.allclose(m @ m, m, atol=atol)
                and np.allclose(m, m.conj().T, atol=atol))


# ---------------------------------------------------------------------------
# Pauli and gate application
# ---------------------------------------------------------------------------

def pauli_matrix(p: PauliOperator) -> np.ndarray:
    """Dense 2^n x 2^n matrix of i^phase * X^x Z^z."""
    check_qubits(p.n, "pauli_matrix")
    dim = 1 << p.n
    cols = np.arange(dim)
    rows = cols ^ p.x
    signs = 1 - 2.0 * (f2_parity_array(cols & p.z))
    mat = np.zeros((dim, dim), dtype=complex)
    mat[rows, cols] = (1j ** p.phase) * signs
    return mat


def f2_parity_array(values: np.ndarray) -> np.ndarray:
    """Bitwise parity of each entry of a nonnegative integer array."""
    v = np.asarray(values).astype(np.uint64).copy()
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> np.uint64(shift)
    return (v & np.uint64(1)).astype(np.int64)


def apply_pauli(p: PauliOperator, array: np.ndarray) -> np.ndarray:
    """Apply a Pauli to a statevector or to each column of a matrix.

    Row index bit j is qubit j; columns (if any) are untouched.
    """
    dim = 1 << p.n
    if array.shape[0] != dim:
        raise ValueError(f"array has {array.shape[0]} rows, expected {dim}")
    rows = np.arange(dim) ^ p.x
    signs = (1j ** p.phase) * (1 - 2.0 * f2_parity_array(np.arange(dim) & p.z))
    out = np.empty_like(array, dtype=complex)
    if array.ndim == 1:
        out[rows] = signs * array
    else:
        out[rows] = signs[:, None] * array
    return out


def apply_on_qubits(u: np.ndarray, qubits: tuple[int, ...], array: np.ndarray,
                    n: int) -> np.ndarray:
    """Apply a small unitary/matrix on the listed qubits of an n-qubit array.

    The small matrix's index bit i corresponds to qubits[i].  `array`
    may be a vector or a matrix whose rows form the qubit register.
    """
    m = len(qubits)
    u = np.asarray(u, dtype=complex)
    if u.shape != (1 << m, 1 << m):
        raise ValueError(f"operator shape {u.shape} does not match {m} qubits")
    if len(set(qubits)) != m or any(not 0 <= q < n for q in qubits):
        raise ValueError(f"bad qubit list {qubits}")
    has_cols = array.ndim > 1
    extra = [array.shape[1]] if has_cols else []
    # order='F' makes axis j of the reshape correspond to index bit j,
    # i.e. qubit j, so axes can be addressed by qubit label.
    work = np.asarray(array, dtype=complex).reshape([2] * n + extra, order="F")
    op = u.reshape([2] * (2 * m), order="F")
    result = np.tensordot(op, work, axes=(list(range(m, 2 * m)), list(qubits)))
    # tensordot leaves the op's output axes first, then the untouched
    # axes in their original order; permute qubits back into place.
    remaining = [q for q in range(n) if q not in qubits] + ([n] if has_cols else [])
    src_of_pos = {q: i for i, q in enumerate(qubits)}
    src_of_pos.update({q: m + j for j, q in enumerate(remaining)})
    perm = [src_of_pos[pos] for pos in range(n + (1 if has_cols else 0))]
    return result.transpose(perm).reshape(array.shape, order="F")


def apply_circuit(circ: CliffordCircuit, array: np.ndarray) -> np.ndarray:
    """Apply a Clifford circuit gate by gate."""
    n = circ.n
    out = np.asarray(array, dtype=complex)
    for name, qubits in circ.gates:
        if name == "cnot":
            out = _apply_cnot(qubits[0], qubits[1], out, n)
        elif name == "cz":
            out = _apply_cz(qubits[0], qubits[1], out, n)
        else:
            out = apply_on_qubits(GATE_MATRICES[name], qubits, out, n)
    return out


def _apply_cnot(c: int, t: int, array: np.ndarray, n: int) -> np.ndarray:
    dim = 1 << n
    idx = np.arange(dim)
    src = np.where((idx >> c) & 1 == 1, idx ^ (1 << t), idx)
    return array[src]


def _apply_cz(c: int, t: int, array: np.ndarray, n: int) -> np.ndarray:
    dim = 1 << n
    idx = np.arange(dim)
    signs = 1 - 2.0 * (((idx >> c) & (idx >> t)) & 1)
    if array.ndim == 1:
        return signs * array
    return signs[:, None] * array


def circuit_unitary(circ: CliffordCircuit) -> np.ndarray:
    check_qubits(circ.n, "circuit_unitary")
    return apply_circuit(circ, np.eye(1 << circ.n, dtype=complex))


# ---------------------------------------------------------------------------
# Code-space isometries and projectors
# ---------------------------------------------------------------------------

def codespace_isometry(code: StabilizerCode) -> np.ndarray:
    """2^n x 2^k isometry from the deterministic encoder circuit.

    Column m is the encoding of basis state |m> (ancillas |0^r>).
    """
    check_qubits(code.n, "codespace_isometry")
    basis = np.zeros((1 << code.n, 1 << code.k), dtype=complex)
    basis[np.arange(1 << code.k), np.arange(1 << code.k)] = 1.0
    return apply_circuit(code.encoder, basis)


def codespace_projector(code: StabilizerCode) -> np.ndarray:
    """Stabilizer-group average 2^-r * sum of signed group elements."""
    check_qubits(code.n, "codespace_projector")
    dim = 1 << code.n
    acc = np.zeros((dim, dim), dtype=complex)
    elements = [PauliOperator.identity(code.n)]
    for g in code.gens:
        elements += [e.mul(g) for e in elements]
    for e in elements:
        acc += pauli_matrix(e)
    return acc / len(elements)


# ---------------------------------------------------------------------------
# Operator norm
# ---------------------------------------------------------------------------

def operator_norm(m: np.ndarray, max_iter: int = 10**4) -> float:
    """Largest singular value to 1e-10 absolute accuracy.

    Full decomposition up to dimension 512; power iteration on M^dagger M
    above that.
    """
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    if max(m.shape) > 4096:
        raise SizeGuardError(f"operator_norm limited to dimension 4096, got {m.shape}")
    if max(m.shape) <= 512:
        return float(np.linalg.svd(m, compute_uv=False)[0])
    gram = m.conj().T @ m if m.shape[1] <= m.shape[0] else m @ m.conj().T
    rng = np.random.default_rng(0)
    v = rng.standard_normal(gram.shape[0]) + 1j * rng.standard_normal(gram.shape[0])
    v /= np.linalg.norm(v)
    last = 0.0
    for _ in range(max_iter):
        w = gram @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0
        v = w / norm
        if abs(norm - last) < 1e-13 * max(norm, 1.0):
            return float(np.sqrt(norm))
        last = norm
    raise RuntimeError(f"power iteration did not converge in {max_iter} iterations")


# ---------------------------------------------------------------------------
# Channels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantumChannel:
    """CPTP map given by Kraus matrices on a declared qubit support.

    Kraus matrices act on the support register only (dimension
    2^len(support)); the channel is identity elsewhere.
    """

    n: int
    kraus: tuple[np.ndarray, ...]
    support: tuple[int, ...]

    def __post_init__(self):
        support = tuple(sorted(self.support))
        object.__setattr__(self, "support", support)
        if any(not 0 <= q < self.n for q in support) or len(set(support)) != len(support):
            raise ValueError(f"bad support {support} for {self.n} qubits")
        dim = 1 << len(support)
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        object.__setattr__(self, "kraus", ops)
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (dim, dim):
                raise ValueError(f"Kraus shape {k.shape} does not match support {support}")
        total = sum(k.conj().T @ k for k in ops)
        if not np.allclose(total, np.eye(dim), atol=ATOL):
            raise ValueError("Kraus operators do not satisfy the CPTP condition")

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "support": list(self.support),
            "kraus": [[[[float(z.real), float(z.imag)] for z in row] for row in k]
                      for k in self.kraus],
        }

    @classmethod
    def from_record(cls, record: dict) -> "QuantumChannel":
        kraus = tuple(np.array([[complex(re, im) for re, im in row] for row in k])
                      for k in record["kraus"])
        return cls(int(record["n"]), kraus, tuple(record["support"]))

    def dumps(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "QuantumChannel":
        return cls.from_record(json.loads(text))


def apply_channel(channel: QuantumChannel, branches: list[Branch] | np.ndarray,
                  drop_tol: float = 1e-14) -> list[Branch]:
    """One branch per (input branch, Kraus operator), total weight preserved.

    Zero-weight branches (below drop_tol) are dropped since they cannot
    be normalized.
    """
    if isinstance(branches, np.ndarray):
        branches = [(1.0, branches)]
    out: list[Branch] = []
    for weight, vec in branches:
        n = _qubit_count(vec.shape[0])
        for k in channel.kraus:
            new = apply_on_qubits(k, channel.support, vec, n)
            w = float(np.linalg.norm(new) ** 2) * weight
            if w > drop_tol:
                out.append((w, new / np.linalg.norm(new)))
    return out


def branch_total_weight(branches: list[Branch]) -> float:
    return float(sum(w for w, _ in branches))


# Standard single-qubit channels ------------------------------------------------

def depolarizing_channel(p: float, qubit: int, n: int) -> QuantumChannel:
    k = [np.sqrt(1 - 3 * p / 4) * _I2, np.sqrt(p / 4) * _X,
         np.sqrt(p / 4) * (1j * _X @ _Z), np.sqrt(p / 4) * _Z]
    return QuantumChannel(n, tuple(k), (qubit,))


def dephasing_channel(p: float, qubit: int, n: int) -> QuantumChannel:
    """Phase damping: measure in Z with probability p."""
    k = [np.sqrt(1 - p) * _I2,
         np.sqrt(p) * np.diag([1, 0]).astype(complex),
         np.sqrt(p) * np.diag([0, 1]).astype(complex)]
    return QuantumChannel(n, tuple(k), (qubit,))


def replace_channel(target_state: np.ndarray, qubit: int, n: int) -> QuantumChannel:
    """Trace out the qubit and substitute the given pure state."""
    psi = np.asarray(target_state, dtype=complex).reshape(2)
    psi = psi / np.linalg.norm(psi)
    k = [np.outer(psi, e) for e in np.eye(2)]
    return QuantumChannel(n, tuple(k), (qubit,))


def pauli_unitary_channel(p: PauliOperator, n: int) -> QuantumChannel:
    support = p.support if p.support else (0,)
    small = p.restricted_to(support)
    return QuantumChannel(n, (pauli_matrix(small),), support)


# ---------------------------------------------------------------------------
# Fidelity measures
# ---------------------------------------------------------------------------

def maximally_entangled_overlap(branches: list[Branch], msg_qubits: tuple[int, ...],
                                ref_qubits: tuple[int, ...]) -> float:
    """<Phi| rho_{msg,ref} |Phi> for the branch mixture rho.

    Phi is the maximally entangled state pairing msg_qubits[i] with
    ref_qubits[i]; every other qubit is traced out.
    """
    k = len(msg_qubits)
    if len(ref_qubits) != k:
        raise ValueError("message and reference registers differ in size")
    total = 0.0
    for weight, vec in branches:
        n = _qubit_count(vec.shape[0])
        work = vec.reshape([2] * n, order="F")
        keep = list(msg_qubits) + list(ref_qubits)
        junk = [q for q in range(n) if q not in keep]
        work = work.transpose(keep + junk).reshape(1 << len(keep), -1, order="F")
        # Phi as a row vector over (msg, ref): nonzero where msg == ref.
        idx = np.arange(1 << k)
        phi_rows = idx | (idx << k)
        amp = work[phi_rows, :].sum(axis=0) / np.sqrt(1 << k)
        total += weight * float(np.vdot(amp, amp).real)
    return total


def entanglement_fidelity(pipeline, k: int, n_system: int) -> float:
    """Fidelity of a channel pipeline against the identity on k qubits.

    The pipeline is a callable on branch lists over n_system + k qubits
    (reference register on the top k qubits, untouched by the pipeline).
    Input: |Phi> on (message, reference) with ancillas |0>.
    """
    check_qubits(n_system + k, "entanglement_fidelity")
    dim = 1 << (n_system + k)
    vec = np.zeros(dim, dtype=complex)
    for m in range(1 << k):
        vec[m | (m << n_system)] = 1.0
    vec /= np.linalg.norm(vec)
    branches = pipeline([(1.0, vec)])
    msg = tuple(range(k))
    ref = tuple(range(n_system, n_system + k))
    return maximally_entangled_overlap(branches, msg, ref)
