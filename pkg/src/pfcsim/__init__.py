"""Desk-scale simulation of publicly-decodable Pauli functional commitments,
signature tokens, publicly-verifiable classical verification, and the
obfuscation pipeline built on them."""

__version__ = "0.1.0"
