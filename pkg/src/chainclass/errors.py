"""Exception taxonomy. Every error carries a stable machine-readable code."""

from __future__ import annotations


class ChainClassError(Exception):
    """Base class; ``code`` is the stable identifier used on the wire."""

    code = "Error"

    def __str__(self) -> str:
        msg = super().__str__()
        return f"{self.code}: {msg}" if msg else self.code


# --- encoding / crypto -------------------------------------------------- #

class NonCanonicalEncoding(ChainClassError):
    code = "NonCanonicalEncoding"


class InvalidKey(ChainClassError):
    code = "InvalidKey"


class BadSignature(ChainClassError):
    code = "BadSignature"


# --- ledger / chain ----------------------------------------------------- #

class BadLink(ChainClassError):
    code = "BadLink"


class BadSeal(ChainClassError):
    code = "BadSeal"


class WrongProposer(BadSeal):
    code = "WrongProposer"


class BadStateRoot(ChainClassError):
    code = "BadStateRoot"


class GasOverflow(ChainClassError):
    code = "GasOverflow"


class BadTx(ChainClassError):
    code = "BadTx"

    def __init__(self, index: int, reason: str = ""):
        super().__init__(f"tx #{index}: {reason}" if reason else f"tx #{index}")
        self.index = index
        self.reason = reason


# --- consensus ---------------------------------------------------------- #

class EmptyAuthoritySet(ChainClassError):
    code = "EmptyAuthoritySet"


class NoStake(ChainClassError):
    code = "NoStake"


# --- vm (inclusion-level; contract-level failures become receipts) ------ #

class InsufficientFeeBalance(ChainClassError):
    code = "InsufficientFeeBalance"


class StaleNonce(ChainClassError):
    code = "StaleNonce"


# --- market ------------------------------------------------------------- #

class ZeroSpend(ChainClassError):
    code = "ZeroSpend"


# --- wallet ------------------------------------------------------------- #

class WrongPassphrase(ChainClassError):
    code = "WrongPassphrase"


class LockedKeystore(ChainClassError):
    code = "LockedKeystore"


class CorruptFile(ChainClassError):
    code = "CorruptFile"


# --- node-net ----------------------------------------------------------- #

class TxRejected(ChainClassError):
    """Mempool admission failure; ``reason`` holds the underlying code."""

    code = "TxRejected"

    def __init__(self, reason: str, message: str = ""):
        super().__init__(message or reason)
        self.reason = reason


class InvalidSuffix(ChainClassError):
    code = "InvalidSuffix"


class ScenarioError(ChainClassError):
    code = "ScenarioError"

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason
