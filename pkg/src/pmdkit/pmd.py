"""Key-superposed Pauli-detection codes built from purity-testing families.

The encoder maps a message state into a uniform superposition over
keys, with each branch holding the corresponding keyed stabilizer
encoding:

    B |m> = |K|^(-1/2) sum_k  Enc_k(|m>|0^lam>) (x) |k>

Register layout (little-endian qubits): message on qubits
[0, n-lam), per-key ancilla on [n-lam, n), key register on [n, n+lam).
Key basis states are field elements in polynomial-basis bit order.

The detection figure of merit is the worst operator norm of the
code-space-compressed error, max over nonidentity Paulis E of
|B^dag E B|, measured exhaustively (or by seeded sampling above the
size guard).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .densesim import (apply_pauli, codespace_isometry, circuit_unitary,
                       f2_parity_array)
from .limits import SizeGuardError, check_qubits
from .ptc import PtcFamily
from .symplectic import PauliOperator


class PmdCode:
    """A key-superposed detection code derived from a keyed family."""

    def __init__(self, family: PtcFamily):
        check_qubits(family.n + family.lam, "build_pmd", limit=12)
        self.family = family
        self.key_qubits = family.lam
        self.code_qubits = family.n
        self.message_qubits = family.n - family.lam
        self.total = family.n + family.lam
        self.encoder = self._build_encoder()

    def _build_encoder(self) -> np.ndarray:
        dim_msg = 1 << self.message_qubits
        dim_total = 1 << self.total
        scale = 1.0 / np.sqrt(self.family.num_keys)
        enc = np.zeros((dim_total, dim_msg), dtype=complex)
        for key_bits in range(self.family.num_keys):
            code = self.family.codes[key_bits]
            b_k = codespace_isometry(code)  # 2^n x 2^(n-lam)
            offset = key_bits << self.code_qubits
            enc[offset:offset + (1 << self.code_qubits), :] += scale * b_k
        return enc

    @cached_property
    def projector(self) -> np.ndarray:
        return self.encoder @ self.encoder.conj().T

    @cached_property
    def encoder_unitary(self) -> np.ndarray:
        """Unitary extension of the encoder on all n+lam qubits.

        Applies a Hadamard layer on the key register, then the per-key
        Clifford encoders controlled on the key.  Restricted to
        |m>|0^(lam+lam)> it reproduces the encoder isometry.
        """
        dim_code = 1 << self.code_qubits
        h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        h_layer = np.eye(1, dtype=complex)
        for _ in range(self.key_qubits):
            h_layer = np.kron(h, h_layer)
        u = np.kron(h_layer, np.eye(dim_code))
        blocks = np.zeros((1 << self.total, 1 << self.total), dtype=complex)
        for key_bits in range(self.family.num_keys):
            enc_k = circuit_unitary(self.family.codes[key_bits].encoder)
            sl = slice(key_bits * dim_code, (key_bits + 1) * dim_code)
            blocks[sl, sl] = enc_k
        return blocks @ u

    def __repr__(self) -> str:
        return (f"PmdCode(n={self.code_qubits}, lam={self.key_qubits}, "
                f"message={self.message_qubits})")


def build_pmd(family: PtcFamily) -> PmdCode:
    return PmdCode(family)


@dataclass(frozen=True)
class EpsilonReport:
    value: float
    argmax: PauliOperator
    exhaustive: bool
    samples: int | None = None
    seed: int | None = None


def _compressed_norms_for_x(encoder: np.ndarray, x_mask: int, walsh: np.ndarray) -> np.ndarray:
    """Largest singular value of B^dag E B for all z at a fixed x mask.

    Phases of E drop out of singular values, so only the (x, z)
    exponents matter; row permutation handles X, the Walsh matrix
    handles every Z sign pattern at once.
    """
    dim, k_dim = encoder.shape
    permuted = encoder[np.arange(dim) ^ x_mask]
    # T[i, (j,l)] = conj(B[i,j]) * (P_x B)[i,l]
    t = (encoder.conj()[:, :, None] * permuted[:, None, :]).reshape(dim, k_dim * k_dim)
    stacked = (walsh @ t).reshape(dim, k_dim, k_dim)
    return np.linalg.svd(stacked, compute_uv=False)[:, 0]


def _walsh_matrix(n_qubits: int) -> np.ndarray:
    dim = 1 << n_qubits
    idx = np.arange(dim, dtype=np.uint64)
    par = f2_parity_array(idx[:, None] & idx[None, :])
    return (1.0 - 2.0 * par).astype(float)


def measure_pmd_epsilon(pmd: PmdCode, samples: int | None = None,
                        seed: int | None = None) -> EpsilonReport:
    """max over E != I (mod phase) of |B^dag E B|, with the argmax.

    Exhaustive over all 4^total - 1 exponent pairs for total <= 10;
    beyond that pass `samples` for a seeded uniform sample (each
    sampled norm is still exact).
    """
    total = pmd.total
    if samples is None:
        if total > 10:
            raise SizeGuardError(
                "exhaustive detection sweep is limited to 10 total qubits; "
                "re-run with samples=<count> and a seed for sampling mode")
        walsh = _walsh_matrix(total)
        best = -1.0
        best_xz = (0, 0)
        for x_mask in range(1 << total):
            norms = _compressed_norms_for_x(pmd.encoder, x_mask, walsh)
            if x_mask == 0:
                norms[0] = -np.inf  # exclude the identity
            z_best = int(np.argmax(norms))
            if norms[z_best] > best:
                best = float(norms[z_best])
                best_xz = (x_mask, z_best)
        x, z = best_xz
        return EpsilonReport(best, PauliOperator(total, x, z, 0), exhaustive=True)
    rng = np.random.default_rng(np.random.Philox(seed))
    best = -1.0
    best_xz = (0, 0)
    for _ in range(samples):
        code = int(rng.integers(1, (1 << (2 * total))))
        x, z = code & ((1 << total) - 1), code >> total
        e = PauliOperator(total, x, z, 0)
        m = pmd.encoder.conj().T @ apply_pauli(e, pmd.encoder)
        norm = float(np.linalg.svd(m, compute_uv=False)[0])
        if norm > best:
            best, best_xz = norm, (x, z)
    x, z = best_xz
    return EpsilonReport(best, PauliOperator(total, x, z, 0), exhaustive=False,
                         samples=samples, seed=seed)


def compressed_error_norm(pmd: PmdCode, e: PauliOperator) -> float:
    """|B^dag E B| for one specific error."""
    if e.n != pmd.total:
        raise ValueError(f"error acts on {e.n} qubits, code has {pmd.total}")
    m = pmd.encoder.conj().T @ apply_pauli(e, pmd.encoder)
    return float(np.linalg.svd(m, compute_uv=False)[0])


def key_phase_error(pmd: PmdCode, b_mask: int) -> PauliOperator:
    """Z^b on the key register, identity on the code register."""
    if not 0 <= b_mask < (1 << pmd.key_qubits):
        raise ValueError("phase mask outside the key register")
    return PauliOperator(pmd.total, 0, b_mask << pmd.code_qubits, 0)


def auth_unitary(pmd: PmdCode) -> np.ndarray:
    """Detection unitary on total+1 qubits (flag qubit on top).

    First reflects through the code space while flipping the flag
    (projector branch gets X on the flag, complement gets Z), then
    un-encodes controlled on the flag being 1.  Uncorrupted encodings
    map exactly to |message>|0...0>|1>_flag.
    """
    check_qubits(pmd.total + 1, "auth_unitary", limit=13)
    dim = 1 << pmd.total
    proj = pmd.projector
    comp = np.eye(dim) - proj
    u_meas = np.zeros((2 * dim, 2 * dim), dtype=complex)
    u_meas[:dim, :dim] = comp
    u_meas[:dim, dim:] = proj
    u_meas[dim:, :dim] = proj
    u_meas[dim:, dim:] = -comp
    controlled_dec = np.zeros_like(u_meas)
    controlled_dec[:dim, :dim] = np.eye(dim)
    controlled_dec[dim:, dim:] = pmd.encoder_unitary.conj().T
    return controlled_dec @ u_meas
