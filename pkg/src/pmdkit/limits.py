"""Global size guards for dense simulation.

The toolkit refuses to materialize statevectors or sweeps beyond a desk
scale qubit budget.  `PMDKIT_MAX_QUBITS` overrides the default of 14.
"""

import os

DEFAULT_MAX_QUBITS = 14

# Exhaustive sweeps abort above this many inner iterations and ask for
# sampling mode instead.
SWEEP_GUARD = 10**8


class SizeGuardError(RuntimeError):
    """Raised when a request exceeds the configured desk-scale budget."""


def max_qubits() -> int:
    raw = os.environ.get("PMDKIT_MAX_QUBITS")
    if raw is None:
        return DEFAULT_MAX_QUBITS
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"PMDKIT_MAX_QUBITS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"PMDKIT_MAX_QUBITS must be positive, got {value}")
    return value


def check_qubits(n: int, what: str, limit: int | None = None) -> None:
    cap = max_qubits() if limit is None else min(limit, max_qubits())
    if n > cap:
        raise SizeGuardError(f"{what} needs {n} qubits, above the limit of {cap} "
                             f"(set PMDKIT_MAX_QUBITS to override)")
