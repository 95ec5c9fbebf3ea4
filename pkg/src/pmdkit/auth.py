"""Keyless authentication over qubit-wise channels.

Classical side: non-malleable codes against bit-wise tampering, with an
exact LP-based verifier.  For a fixed tampering, the decoder's output
distribution must be close to a message-independent mixture over
{original, reject, unrelated value}; the verifier computes the exact
tampered-decode distribution for every message and solves the best
simulator distribution as a linear program over the simplex.

Quantum side: Pauli one-time pads and their twirls, eta-Pauli channel
classification, packing masses of product channels over stabilizer and
normalizer groups, and the code-composition protocols that combine a
classical non-malleable key with a padded detection code, at rate 1/3
(uniform pad) and rate ~1 (pairwise-independent pad over concatenated
blocks).

Everything here is exact branch/key enumeration at toy scale; nothing
is sampled.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from . import f2
from .aqec import ComposedCode
from .densesim import apply_pauli, codespace_isometry
from .galois import FieldSpec
from .limits import SizeGuardError
from .symplectic import PauliOperator, StabilizerCode

PAULI_LABELS = ("I", "X", "Y", "Z")
_P1 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
}

REJECT = None  # decoder sentinel


# ---------------------------------------------------------------------------
# Non-malleable codes and bit-wise tampering
# ---------------------------------------------------------------------------

BIT_TAGS = ("keep", "flip", "set0", "set1")


@dataclass(frozen=True)
class TamperFunction:
    """Deterministic bit-wise tampering, one tag per codeword bit."""

    tags: tuple[str, ...]

    def __post_init__(self):
        for tag in self.tags:
            if tag not in BIT_TAGS:
                raise ValueError(f"unknown bit tag {tag!r}")

    @property
    def n(self) -> int:
        return len(self.tags)

    @classmethod
    def keep_all(cls, n: int) -> "TamperFunction":
        return cls(("keep",) * n)

    @classmethod
    def set_to(cls, word: int, n: int) -> "TamperFunction":
        return cls(tuple("set1" if (word >> i) & 1 else "set0" for i in range(n)))

    def apply(self, word: int) -> int:
        out = 0
        for i, tag in enumerate(self.tags):
            bit = (word >> i) & 1
            if tag == "flip":
                bit ^= 1
            elif tag == "set0":
                bit = 0
            elif tag == "set1":
                bit = 1
            out |= bit << i
        return out


class NmCode:
    """A randomized code with reject-capable decoding.

    `encode(s, r)` maps a k-bit message and rand_bits of randomness to
    an n-bit codeword; `decode` returns the message or REJECT.  Correct
    decoding of untampered codewords is checked on construction.
    """

    def __init__(self, k: int, n: int, rand_bits: int, encode, decode,
                 name: str = ""):
        self.k = k
        self.n = n
        self.rand_bits = rand_bits
        self._encode = encode
        self._decode = decode
        self.name = name
        if k > 20 or rand_bits > 10:
            raise SizeGuardError("non-malleable code table too large to validate")
        for s in range(1 << k):
            for r in range(1 << rand_bits):
                if decode(encode(s, r)) != s:
                    raise ValueError(f"decode(encode({s}, {r})) != {s}")

    def encode(self, s: int, r: int) -> int:
        return self._encode(s, r)

    def decode(self, word: int) -> int | None:
        return self._decode(word)

    def tampered_distributions(self, f: TamperFunction) -> list[dict]:
        """Exact decode distribution per message under the tampering."""
        if f.n != self.n:
            raise ValueError("tampering arity does not match the codeword length")
        out = []
        weight = Fraction(1, 1 << self.rand_bits)
        for s in range(1 << self.k):
            dist: dict = {}
            for r in range(1 << self.rand_bits):
                result = self.decode(f.apply(self.encode(s, r)))
                dist[result] = dist.get(result, Fraction(0)) + weight
            out.append(dist)
        return out

    # Table serialization -------------------------------------------------

    def to_record(self) -> dict:
        encode_table = {f"{s},{r}": self.encode(s, r)
                        for s in range(1 << self.k)
                        for r in range(1 << self.rand_bits)}
        decode_table = {}
        for w in range(1 << self.n):
            got = self.decode(w)
            decode_table[str(w)] = -1 if got is REJECT else got
        return {"k": self.k, "n": self.n, "rand_bits": self.rand_bits,
                "name": self.name, "encode": encode_table, "decode": decode_table}

    @classmethod
    def from_record(cls, record: dict) -> "NmCode":
        enc = {tuple(map(int, key.split(","))): int(w)
               for key, w in record["encode"].items()}
        dec = {int(w): (None if s == -1 else int(s))
               for w, s in record["decode"].items()}
        return cls(int(record["k"]), int(record["n"]), int(record["rand_bits"]),
                   lambda s, r: enc[(s, r)], lambda w: dec.get(w, REJECT),
                   name=record.get("name", ""))

    def dumps(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "NmCode":
        return cls.from_record(json.loads(text))


def systematic_parity_nm(k: int) -> NmCode:
    """Message || (parity ^ r) || r, rejecting on checksum mismatch.

    A weak but fully explicit code; protocols accept any NmCode table in
    its place.
    """
    def enc(s, r):
        return s | ((f2.parity(s) ^ r) << k) | (r << (k + 1))

    def dec(w):
        s = w & ((1 << k) - 1)
        check, r = (w >> k) & 1, (w >> (k + 1)) & 1
        return s if check == (f2.parity(s) ^ r) else REJECT

    return NmCode(k, k + 2, 1, enc, dec, name=f"parity[{k}]")


@dataclass(frozen=True)
class NmDecomposition:
    """Best simulator distribution for one tampering, plus its distance."""

    epsilon: float
    simulator: dict  # atom -> probability; atoms: int message, REJECT, "same"


def nm_decompose(code: NmCode, f: TamperFunction) -> NmDecomposition:
    """Solve the inner simulator LP for one fixed tampering.

    Atoms are the 2^k messages plus reject plus "same"; the objective
    is the worst-message total-variation distance to the exact
    tampered-decode distribution.
    """
    dists = code.tampered_distributions(f)
    n_msg = 1 << code.k
    atoms = n_msg + 2  # [messages..., reject, same]
    rej_atom, same_atom = n_msg, n_msg + 1
    t_col = atoms

    # Variable layout: [q (atoms), t, slack per (message, tracked outcome)].
    # Only outcomes in the decode support (plus the message itself and
    # reject) need slack variables; simulator mass on any other message
    # value contributes to the distance linearly.
    slack_index = {}
    n_vars = atoms + 1
    supports = []
    for s, dist in enumerate(dists):
        support = sorted(o for o in dist if o is not REJECT)
        if s not in support:
            support.insert(0, s)
        support.append(REJECT)
        supports.append(support)
        for o in support:
            slack_index[(s, repr(o))] = n_vars
            n_vars += 1

    a_ub, b_ub = [], []
    for s, dist in enumerate(dists):
        tv_row = np.zeros(n_vars)
        for o in supports[s]:
            d_val = float(dist.get(o, Fraction(0)))
            # p(o) = q_o + q_same * [o == s]; p(Rej) = q_Rej.
            p_row = np.zeros(n_vars)
            if o is REJECT:
                p_row[rej_atom] = 1.0
            else:
                p_row[o] = 1.0
                if o == s:
                    p_row[same_atom] = 1.0
            e_col = slack_index[(s, repr(o))]
            up = p_row.copy()
            up[e_col] = -1.0
            a_ub.append(up)        # p - d <= e
            b_ub.append(d_val)
            down = -p_row
            down[e_col] = -1.0
            a_ub.append(down)      # d - p <= e
            b_ub.append(-d_val)
            tv_row[e_col] += 0.5
        # Simulator mass on messages outside the tracked set counts whole.
        for v in range(n_msg):
            if v not in supports[s]:
                tv_row[v] += 0.5
        tv_row[t_col] = -1.0
        a_ub.append(tv_row)        # TV_s <= t
        b_ub.append(0.0)
    a_eq = np.zeros((1, n_vars))
    a_eq[0, :atoms] = 1.0
    objective = np.zeros(n_vars)
    objective[t_col] = 1.0
    result = linprog(c=objective, A_ub=np.array(a_ub), b_ub=np.array(b_ub),
                     A_eq=a_eq, b_eq=[1.0],
                     bounds=[(0, None)] * n_vars, method="highs")
    if not result.success:  # pragma: no cover - the LP is always feasible
        raise RuntimeError(f"simulator LP failed: {result.message}")
    q = result.x[:atoms]
    simulator = {i: float(q[i]) for i in range(n_msg) if q[i] > 1e-12}
    if q[rej_atom] > 1e-12:
        simulator[REJECT] = float(q[rej_atom])
    if q[same_atom] > 1e-12:
        simulator["same"] = float(q[same_atom])
    return NmDecomposition(float(result.x[t_col]), simulator)


def all_tamper_functions(n: int):
    for tags in itertools.product(BIT_TAGS, repeat=n):
        yield TamperFunction(tags)


def nm_verify(code: NmCode) -> float:
    """max over deterministic bit-wise tamperings of the simulator gap.

    Randomized tamperings are convex mixtures of deterministic ones and
    the definition is convex in the tampering, so this maximum is the
    code's error.
    """
    if code.k > 3 or code.n > 8:
        raise SizeGuardError("nm_verify sweeps 4^n tamperings; needs k <= 3, n <= 8")
    worst = 0.0
    for f in all_tamper_functions(code.n):
        worst = max(worst, nm_decompose(code, f).epsilon)
    return worst


def nm_search(k: int, n: int, trials: int, rng: np.random.Generator,
              rand_bits: int = 1) -> tuple[NmCode, float]:
    """Best-of-`trials` random injective table codes, ranked by nm_verify."""
    if k + rand_bits > n:
        raise ValueError("codeword too short for message plus randomness")
    best_code, best_eps = None, np.inf
    for trial in range(max(1, trials)):
        perm = rng.permutation(1 << n)
        enc_table = {}
        dec_table = {}
        idx = 0
        for s in range(1 << k):
            for r in range(1 << rand_bits):
                word = int(perm[idx])
                idx += 1
                enc_table[(s, r)] = word
                dec_table[word] = s
        code = NmCode(k, n, rand_bits,
                      lambda s, r, table=enc_table: table[(s, r)],
                      lambda w, table=dec_table: table.get(w, REJECT),
                      name=f"random[{k}->{n}]#{trial}")
        eps = nm_verify(code)
        if eps < best_eps:
            best_code, best_eps = code, eps
    return best_code, best_eps


# ---------------------------------------------------------------------------
# Channel decomposition, twirling, eta classification
# ---------------------------------------------------------------------------

def pauli_decompose_channel(kraus) -> np.ndarray:
    """Coefficients c[mu, sigma] with K_mu = sum_sigma c * sigma."""
    out = np.zeros((len(kraus), 4), dtype=complex)
    for mu, k in enumerate(kraus):
        k = np.asarray(k, dtype=complex)
        if k.shape != (2, 2):
            raise ValueError("expected single-qubit Kraus operators")
        for j, label in enumerate(PAULI_LABELS):
            out[mu, j] = np.trace(_P1[label].conj().T @ k) / 2
    return out


def twirl_channel(kraus) -> np.ndarray:
    """Pauli-channel weights after conjugation by a uniform Pauli pad."""
    coeffs = pauli_decompose_channel(kraus)
    return (np.abs(coeffs) ** 2).sum(axis=0).real


@dataclass(frozen=True)
class EtaPauliReport:
    eta: float
    best_pauli: str


def eta_classify(kraus) -> EtaPauliReport:
    weights = twirl_channel(kraus)
    best = int(np.argmax(weights))
    return EtaPauliReport(float(1.0 - weights[best]), PAULI_LABELS[best])


def channel_choi(kraus) -> np.ndarray:
    """Choi state (Lambda (x) I)(Phi) for a single-qubit channel."""
    phi = np.zeros(4, dtype=complex)
    phi[0] = phi[3] = 1 / np.sqrt(2)  # |00> + |11>, system qubit low
    rho = np.outer(phi, phi.conj())
    out = np.zeros_like(rho)
    for k in kraus:
        big = np.kron(np.eye(2), np.asarray(k, dtype=complex))
        out += big @ rho @ big.conj().T
    return out


def twirled_choi_by_pad_average(kraus) -> np.ndarray:
    """Explicit average of P^dag Lambda(P . P^dag) P over the four pads."""
    acc = np.zeros((4, 4), dtype=complex)
    for label in PAULI_LABELS:
        p = _P1[label]
        padded = [p.conj().T @ np.asarray(k, dtype=complex) @ p for k in kraus]
        acc += channel_choi(padded)
    return acc / 4


def pauli_channel_choi(weights) -> np.ndarray:
    kraus = [np.sqrt(float(w)) * _P1[label] for label, w in zip(PAULI_LABELS, weights)]
    return channel_choi(kraus)


# ---------------------------------------------------------------------------
# Packing masses and pure distance
# ---------------------------------------------------------------------------

def _symbol_index(p: PauliOperator, qubit: int) -> int:
    bx, bz = (p.x >> qubit) & 1, (p.z >> qubit) & 1
    return {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}[(bx, bz)]


def _normalizer_elements(code: StabilizerCode):
    """All elements of N(Q) mod phase, from the derived basis."""
    if code.n > 8:
        raise SizeGuardError("normalizer enumeration limited to n <= 8")
    elements = [PauliOperator.identity(code.n)]
    for g in code.normalizer:
        elements += [e.mul(g) for e in elements]
    return [PauliOperator(code.n, e.x, e.z, 0) for e in elements]


def pure_distance(code: StabilizerCode) -> int:
    """Minimum weight over nonidentity normalizer elements (stabilizers
    included)."""
    weights = [e.weight for e in _normalizer_elements(code) if not e.is_identity()]
    if not weights:
        raise ValueError("trivial code has no nonidentity normalizer elements")
    return min(weights)


def stabilizer_mass(per_qubit_weights, code: StabilizerCode):
    """sum over stabilizer-group members of the product of per-qubit
    twirled weights; exact when the weights are Fractions."""
    if len(per_qubit_weights) != code.n:
        raise ValueError("need one weight vector per qubit")
    total = 0
    for element in code.stabilizer_group():
        term = 1
        for q in range(code.n):
            term = term * per_qubit_weights[q][_symbol_index(element, q)]
        total = total + term
    return total


def normalizer_l1_mass(per_qubit_abs_coeffs, code: StabilizerCode):
    """sum_mu (sum_{F in N(Q)} |c_F^mu|)^2 for a product channel.

    `per_qubit_abs_coeffs[q][mu]` is a length-4 vector of |c| values in
    I, X, Y, Z order.  Exact when the values are Fractions.
    """
    if len(per_qubit_abs_coeffs) != code.n:
        raise ValueError("need one coefficient table per qubit")
    elements = _normalizer_elements(code)
    symbol_table = [[_symbol_index(e, q) for q in range(code.n)] for e in elements]
    total = 0
    for mu in itertools.product(*(range(len(t)) for t in per_qubit_abs_coeffs)):
        inner = 0
        for symbols in symbol_table:
            term = 1
            for q in range(code.n):
                term = term * per_qubit_abs_coeffs[q][mu[q]][symbols[q]]
            inner = inner + term
        total = total + inner * inner
    return total


def abs_coeffs_from_kraus(kraus):
    """Float |c| table for one qubit, for the L1 packing mass."""
    return [list(np.abs(row)) for row in pauli_decompose_channel(kraus)]


# ---------------------------------------------------------------------------
# Pairwise/t-wise independent pads
# ---------------------------------------------------------------------------

def twise_pad(seed: int, t: int, length: int, word_bits: int | None = None) -> int:
    """Evaluate a degree-(t-1) polynomial over GF(2^w) at fixed points.

    The seed packs t coefficient words of w bits each; the output is the
    concatenation of evaluations at the field points 0, 1, 2, ...,
    truncated to `length` bits.  Any t output words are exactly
    independent and uniform over uniform seeds.
    """
    if t < 1:
        raise ValueError("independence order t must be >= 1")
    if word_bits is None:
        word_bits = 1
        while (length + word_bits - 1) // word_bits > (1 << word_bits):
            word_bits += 1
    npoints = (length + word_bits - 1) // word_bits
    if npoints > (1 << word_bits):
        raise ValueError(f"word size {word_bits} has too few evaluation points")
    if word_bits > 16:
        raise ValueError("pad word size limited to 16 bits")
    field = FieldSpec.default(word_bits)
    mask = (1 << word_bits) - 1
    coeffs = [field.element((seed >> (i * word_bits)) & mask) for i in range(t)]
    out = 0
    for j in range(npoints):
        point = field.element(j)
        acc = field.zero()
        for c in reversed(coeffs):
            acc = acc * point + c
        out |= acc.coeffs << (j * word_bits)
    return out & ((1 << length) - 1)


def twise_pad_seed_bits(t: int, length: int, word_bits: int | None = None) -> int:
    if word_bits is None:
        word_bits = 1
        while (length + word_bits - 1) // word_bits > (1 << word_bits):
            word_bits += 1
    return t * word_bits


def pad_to_pauli(pad: int, n: int) -> PauliOperator:
    """2n pad bits -> X^a Z^b with qubit i reading bits (2i, 2i+1)."""
    x = z = 0
    for i in range(n):
        x |= ((pad >> (2 * i)) & 1) << i
        z |= ((pad >> (2 * i + 1)) & 1) << i
    return PauliOperator(n, x, z, 0)


# ---------------------------------------------------------------------------
# Rate-1/3 protocol
# ---------------------------------------------------------------------------

def _dm_conjugate_pauli(p: PauliOperator, rho: np.ndarray) -> np.ndarray:
    left = apply_pauli(p, rho)
    return apply_pauli(p, left.conj().T).conj().T


def _check_wire_cptp(kraus, where: str) -> None:
    total = sum(np.asarray(k, dtype=complex).conj().T @ np.asarray(k, dtype=complex)
                for k in kraus)
    if not np.allclose(total, np.eye(2), atol=1e-9):
        raise ValueError(f"{where}: Kraus operators are not trace preserving")


def _dm_apply_single_qubit_kraus(kraus, qubit: int, rho: np.ndarray,
                                 n: int) -> np.ndarray:
    from .densesim import apply_on_qubits
    out = np.zeros_like(rho)
    for k in kraus:
        k = np.asarray(k, dtype=complex)
        left = apply_on_qubits(k, (qubit,), rho, n)
        # K rho K^dag == (K (K rho)^dag)^dag, row-applying K both times.
        out += apply_on_qubits(k, (qubit,), left.conj().T, n).conj().T
    return out


@dataclass(frozen=True)
class Auth13Protocol:
    """Rate-1/3 layout: a non-malleable key encapsulation plus a padded
    composed detection code."""

    composed: ComposedCode
    nm: NmCode

    def __post_init__(self):
        if self.nm.k != 2 * self.composed.n:
            raise ValueError(
                f"key needs {2 * self.composed.n} bits, code carries {self.nm.k}")
        if self.composed.n > 5:
            raise SizeGuardError("exhaustive key enumeration needs <= 5 code qubits")

    @property
    def n_quantum(self) -> int:
        return self.composed.n

    @property
    def key_count(self) -> int:
        return 1 << (2 * self.composed.n)


@dataclass(frozen=True)
class AttackReport:
    p_accept: float
    p_accept_wrong: float
    p_reject: float
    fidelity_given_accept: float
    classical_decomposition: NmDecomposition | None = None


@dataclass(frozen=True)
class KeyedEncoding:
    """One key's branch of the protocol state (explicit mode)."""

    probability: float
    key: int
    classical_words: tuple[tuple[float, int], ...]
    quantum: np.ndarray


def auth13_encode(proto: Auth13Protocol, message: np.ndarray) -> list[KeyedEncoding]:
    """Explicit mixture over keys of the padded encoding of a message.

    Each branch carries its classical codeword distribution and the
    padded pure quantum state; product-channel analyses can instead use
    the algebraic twirl path (`auth13_key_recovered_branch`) and skip
    this enumeration.
    """
    vec = proto.composed.encoder_isometry() @ message
    branches = []
    key_weight = 1.0 / proto.key_count
    rand_weight = 1.0 / (1 << proto.nm.rand_bits)
    for s in range(proto.key_count):
        words = tuple((rand_weight, proto.nm.encode(s, r))
                      for r in range(1 << proto.nm.rand_bits))
        padded = apply_pauli(pad_to_pauli(s, proto.n_quantum), vec)
        branches.append(KeyedEncoding(key_weight, s, words, padded))
    return branches


def _entangled_encoding(proto: Auth13Protocol) -> np.ndarray:
    """rho0 on code (x) reference for a maximally entangled message."""
    iso = proto.composed.encoder_isometry()
    k = proto.composed.message_qubits
    n = proto.n_quantum
    vec = np.zeros((1 << n) * (1 << k), dtype=complex)
    for m in range(1 << k):
        vec[(m << n):(m << n) + (1 << n)] = iso[:, m]
    vec /= np.sqrt(1 << k)
    return np.outer(vec, vec.conj())


def _maxent_projector(k: int) -> np.ndarray:
    phi = np.zeros(1 << (2 * k), dtype=complex)
    for m in range(1 << k):
        phi[m | (m << k)] = 1.0
    phi /= np.linalg.norm(phi)
    return np.outer(phi, phi.conj())


def auth13_attack_harness(proto: Auth13Protocol, wire_kraus,
                          classical: TamperFunction) -> AttackReport:
    """Exact security experiment: enumerate keys, apply the per-wire
    channels and the classical tampering, decode, and score acceptance
    of anything other than the original entangled message."""
    n = proto.n_quantum
    k = proto.composed.message_qubits
    if len(wire_kraus) != n:
        raise ValueError(f"need {n} per-wire channels")
    for q, kraus in enumerate(wire_kraus):
        _check_wire_cptp(kraus, f"wire {q}")
    rho0 = _entangled_encoding(proto)
    total_qubits = n + k
    iso = proto.composed.encoder_isometry()
    phi_proj = _maxent_projector(k)
    p_accept = 0.0
    p_wrong = 0.0
    p_reject = 0.0
    fid_acc = 0.0
    key_weight = 1.0 / proto.key_count
    rand_weight = 1.0 / (1 << proto.nm.rand_bits)

    def widen(p: PauliOperator) -> PauliOperator:
        return PauliOperator(total_qubits, p.x, p.z, p.phase)

    for s in range(proto.key_count):
        pad = widen(pad_to_pauli(s, n))
        rho = _dm_conjugate_pauli(pad, rho0)
        for q in range(n):
            rho = _dm_apply_single_qubit_kraus(wire_kraus[q], q, rho, total_qubits)
        # Classical side: decode distribution of the tampered codeword.
        outcomes: dict = {}
        for r in range(1 << proto.nm.rand_bits):
            word = classical.apply(proto.nm.encode(s, r))
            got = proto.nm.decode(word)
            outcomes[got] = outcomes.get(got, 0.0) + rand_weight
        for s_tilde, cl_weight in outcomes.items():
            w = key_weight * cl_weight
            if s_tilde is REJECT:
                p_reject += w
                continue
            unpad = widen(pad_to_pauli(s_tilde, n))
            sigma = _dm_conjugate_pauli(unpad, rho)  # pads are self-inverse
            # Accept POVM and decode collapse to contraction with the
            # composed isometry (syndrome-0 and detection projection).
            big_iso = np.kron(np.eye(1 << k), iso)
            tau = big_iso.conj().T @ sigma @ big_iso
            tr = float(np.trace(tau).real)
            p_accept += w * tr
            p_reject += w * (1.0 - tr)
            overlap = float(np.trace(phi_proj @ tau).real)
            fid_acc += w * overlap
            p_wrong += w * (tr - overlap)
    fidelity = fid_acc / p_accept if p_accept > 1e-15 else 1.0
    return AttackReport(p_accept, p_wrong, p_reject, fidelity)


def pauli_channel_weights_product(wire_kraus) -> list[np.ndarray]:
    return [twirl_channel(k) for k in wire_kraus]


def auth13_key_recovered_branch(proto: Auth13Protocol, wire_kraus) -> AttackReport:
    """Key-recovered branch via the algebraic per-qubit twirl.

    Valid whenever the attack is a product channel: averaging the pad
    over the full key space turns the attack into a Pauli channel with
    product weights; only normalizer elements survive the syndrome
    check, and the detection code bounds what survives the projection.
    """
    outer = proto.composed.outer
    pmd = proto.composed.pmd
    k = proto.composed.message_qubits
    weights = pauli_channel_weights_product(wire_kraus)
    b_pmd = pmd.encoder
    dec_circuit = outer.encoder.inverse()
    phi_proj = _maxent_projector(k)
    p_accept = p_wrong = fid_acc = 0.0
    elements = _normalizer_elements(outer)
    for element in elements:
        prob = 1.0
        for q in range(outer.n):
            prob *= float(weights[q][_symbol_index(element, q)])
        if prob == 0.0:
            continue
        logical = dec_circuit.conjugate_pauli(element.hermitian_form())
        if logical.x >> pmd.total:
            raise AssertionError("normalizer element has X action on ancillas")
        inner = logical.restricted_to(tuple(range(pmd.total))) \
            if not ((logical.x | logical.z) >> pmd.total) else None
        if inner is None:
            # Z action on the outer ancillas is trivial on |0>; drop it.
            inner = PauliOperator(pmd.total, logical.x & ((1 << pmd.total) - 1),
                                  logical.z & ((1 << pmd.total) - 1), logical.phase)
        amp = b_pmd.conj().T @ apply_pauli(inner, b_pmd)
        tau = np.kron(np.eye(1 << k), amp)
        tau = tau @ _maxent_projector(k) @ tau.conj().T
        tr = float(np.trace(tau).real)
        overlap = float(np.trace(phi_proj @ tau).real)
        p_accept += prob * tr
        fid_acc += prob * overlap
        p_wrong += prob * (tr - overlap)
    fidelity = fid_acc / p_accept if p_accept > 1e-15 else 1.0
    return AttackReport(p_accept, p_wrong, 1.0 - p_accept, fidelity)


def substitution_attack(proto: Auth13Protocol, fixed_key: int,
                        fixed_rand: int = 0):
    """Every wire replaced by the matching wire of one fixed valid
    encoding of |0...0>.  Returns (wire channels, classical tampering,
    the substituted product state marginals)."""
    n = proto.n_quantum
    iso = proto.composed.encoder_isometry()
    codeword = apply_pauli(pad_to_pauli(fixed_key, n), iso[:, 0])
    marginals = []
    wire_channels = []
    for q in range(n):
        work = codeword.reshape([2] * n, order="F")
        mat = np.moveaxis(work, q, 0).reshape(2, -1)
        sigma = mat @ mat.conj().T
        marginals.append(sigma)
        vals, vecs = np.linalg.eigh(sigma)
        kraus = []
        for val, vec in zip(vals, vecs.T):
            if val > 1e-12:
                for basis in np.eye(2):
                    kraus.append(np.sqrt(val) * np.outer(vec, basis))
        wire_channels.append(tuple(kraus))
    classical = TamperFunction.set_to(proto.nm.encode(fixed_key, fixed_rand),
                                      proto.nm.n)
    return wire_channels, classical, marginals


def substitution_overlap_oracle(proto: Auth13Protocol, marginals,
                                fixed_key: int) -> tuple[float, float]:
    """(accept, wrong-accept) of the substituted product state, computed
    directly from dense density matrices rather than the harness loop."""
    n = proto.n_quantum
    k = proto.composed.message_qubits
    rho = np.eye(1, dtype=complex)
    for sigma in marginals:
        rho = np.kron(sigma, rho)  # later qubits to the left (low bits right)
    pad = pad_to_pauli(fixed_key, n)
    rho = _dm_conjugate_pauli(pad, rho)
    iso = proto.composed.encoder_isometry()
    tau = iso.conj().T @ rho @ iso
    accept = float(np.trace(tau).real)
    # The reference register is maximally mixed and uncorrelated, so the
    # post-decode overlap with the entangled target is 2^-k per unit of
    # accepted message mass, distributed through the identity component.
    tau_full = np.kron(np.eye(1 << k) / (1 << k), tau)
    overlap = float(np.trace(_maxent_projector(k) @ tau_full).real)
    return accept, accept - overlap


# ---------------------------------------------------------------------------
# Rate-1 (concatenated, pairwise-independent pad) protocol at toy scale
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Auth1Protocol:
    """Two inner blocks, each a detection code inside an inner stabilizer
    code; an outer code across block messages; a pairwise-independent
    Pauli pad keyed through a non-malleable code."""

    outer: StabilizerCode           # [[n_blocks * k_pmd, k_msg]]
    inner: ComposedCode             # per-block composition
    nm: NmCode

    def __post_init__(self):
        if self.outer.n % self.inner.message_qubits:
            raise ValueError("outer block length must split into inner messages")
        if self.total_quantum > 10:
            raise SizeGuardError("toy protocol limited to 10 quantum qubits")
        if self.nm.k != self.seed_bits:
            raise ValueError(f"key carries {self.nm.k} bits, pad seed needs "
                             f"{self.seed_bits}")

    @property
    def n_blocks(self) -> int:
        return self.outer.n // self.inner.message_qubits

    @property
    def block_qubits(self) -> int:
        return self.inner.n

    @property
    def total_quantum(self) -> int:
        return self.n_blocks * self.block_qubits

    @property
    def pad_bits(self) -> int:
        return 2 * self.total_quantum

    @property
    def word_bits(self) -> int:
        return 2 * self.block_qubits

    @property
    def seed_bits(self) -> int:
        return twise_pad_seed_bits(2, self.pad_bits, word_bits=self.word_bits)

    def pad_for_seed(self, seed: int) -> PauliOperator:
        bits = twise_pad(seed, 2, self.pad_bits, word_bits=self.word_bits)
        return pad_to_pauli(bits, self.total_quantum)

    def encoder_isometry(self) -> np.ndarray:
        """Blockwise inner encodings composed with the outer encoder."""
        outer_iso = codespace_isometry(self.outer)
        block_iso = self.inner.encoder_isometry()
        k_in = self.inner.message_qubits
        lifted = np.eye(1, dtype=complex)
        for _ in range(self.n_blocks):
            lifted = np.kron(block_iso, lifted)
        # lifted maps block messages (grouped low-to-high) to blocks.
        return lifted @ outer_iso


def auth1_encode(proto: Auth1Protocol, message: np.ndarray, seed: int) -> np.ndarray:
    """Pure encoded state for one fixed pad seed."""
    vec = proto.encoder_isometry() @ message
    return apply_pauli(proto.pad_for_seed(seed), vec)


@dataclass(frozen=True)
class Auth1DecodeResult:
    accepted: bool
    accept_probability: float
    rejected_at: str | None
    message: np.ndarray | None


def auth1_decode(proto: Auth1Protocol, state: np.ndarray, seed: int,
                 abort_tol: float = 1e-12) -> Auth1DecodeResult:
    """Decode a pure branch with the given recovered seed.

    Reverts the pad, then walks the inner blocks: each block's syndrome
    check and detection projection collapse to its block accept
    projector, applied projectively with early abort (any inner reject
    forces a global reject).  Survivors are un-encoded blockwise and the
    outer code's syndrome is checked the same way.
    """
    from .densesim import apply_on_qubits
    n = proto.total_quantum
    vec = apply_pauli(proto.pad_for_seed(seed), state)  # pads self-inverse
    acc_op = auth1_block_accept_operator(proto)
    prob = 1.0
    for j in range(proto.n_blocks):
        block_qubits = tuple(range(j * proto.block_qubits,
                                   (j + 1) * proto.block_qubits))
        projected = apply_on_qubits(acc_op, block_qubits, vec, n)
        p_block = float(np.vdot(projected, projected).real)
        prob *= p_block
        if p_block <= abort_tol:
            return Auth1DecodeResult(False, 0.0, f"inner block {j}", None)
        vec = projected / np.sqrt(p_block)
    # Un-encode the accepted blocks, then check the outer code.
    block_iso = proto.inner.encoder_isometry()
    lifted = np.eye(1, dtype=complex)
    for _ in range(proto.n_blocks):
        lifted = np.kron(block_iso, lifted)
    block_messages = lifted.conj().T @ vec
    outer_iso = codespace_isometry(proto.outer)
    message = outer_iso.conj().T @ block_messages
    p_outer = float(np.vdot(message, message).real)
    prob *= p_outer
    if p_outer <= abort_tol:
        return Auth1DecodeResult(False, 0.0, "outer", None)
    return Auth1DecodeResult(True, prob, None, message / np.sqrt(p_outer))


def auth1_block_accept_operator(proto: Auth1Protocol) -> np.ndarray:
    """Projector whose trace against a block state is the probability
    that one inner block passes both its syndrome and detection steps."""
    iso = proto.inner.encoder_isometry()
    return iso @ iso.conj().T


def auth1_block_reject_probability(proto: Auth1Protocol, block_channels,
                                   block_rho: np.ndarray) -> float:
    """Exact accept probability of one inner block under a product
    channel, averaged over the (blockwise-uniform) pad.

    The block marginal of the pairwise-independent pad is uniform, so
    the average over seeds is the per-qubit twirl: a Pauli channel with
    product weights, scored against the block accept projector.
    """
    b = proto.block_qubits
    if len(block_channels) != b:
        raise ValueError(f"need {b} per-qubit channels")
    for q, kraus in enumerate(block_channels):
        _check_wire_cptp(kraus, f"block qubit {q}")
    weights = [twirl_channel(k) for k in block_channels]
    acc_op = auth1_block_accept_operator(proto)
    accept = 0.0
    for code_pt in range(1 << (2 * b)):
        x = code_pt & ((1 << b) - 1)
        z = code_pt >> b
        p = PauliOperator(b, x, z, 0)
        prob = 1.0
        for q in range(b):
            prob *= float(weights[q][_symbol_index(p, q)])
        if prob == 0.0:
            continue
        moved = _dm_conjugate_pauli(p, block_rho)
        accept += prob * float(np.trace(acc_op @ moved).real)
    return 1.0 - accept


def auth1_block_codeword_density(proto: Auth1Protocol, message: np.ndarray,
                                 block: int) -> np.ndarray:
    """Reduced density matrix of one inner block of an encoded message."""
    vec = proto.encoder_isometry() @ message
    n = proto.total_quantum
    work = vec.reshape([2] * n, order="F")
    keep = list(range(block * proto.block_qubits, (block + 1) * proto.block_qubits))
    junk = [q for q in range(n) if q not in keep]
    mat = work.transpose(keep + junk).reshape(1 << len(keep), -1, order="F")
    return mat @ mat.conj().T
