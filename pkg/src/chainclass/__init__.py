"""chainclass: a turn-based internet-marketing simulation on a mini-blockchain.

The package is organised bottom-up:

- ``codec``, ``fixedpoint``, ``crypto``: byte encodings, deterministic
  arithmetic, hashing and signatures.
- ``state``, ``tx``, ``block``, ``chain``: the ledger itself.
- ``consensus``: interchangeable PoW / PoS / PoA sealing engines.
- ``vm``: the deterministic contract execution environment.
- ``market``, ``game``: the simulation rules (market model + on-chain game).
- ``node``, ``netsim``: a full node and the in-process multi-node harness.
- ``wallet``, ``api``, ``cli``, ``config``: operator and client surfaces.
"""

from chainclass import game as _game  # noqa: F401  (registers contracts)

__version__ = "0.1.0"
