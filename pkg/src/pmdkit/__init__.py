"""pmdkit: Pauli manipulation detection codes and their applications.

Constructs purity-testing stabilizer code families, key-superposed PMD
codes, erasure list-decodable stabilizer codes, their composition into
approximate quantum erasure codes, and keyless authentication protocols
over qubit-wise channels.  Every construction is verified exactly at
small scale via exhaustive symplectic algebra and dense statevector
simulation.
"""

__version__ = "0.1.0"
