"""Signature primitive: deterministic Ed25519 over canonical bytes.

One scheme is active at a time, named by ``SCHEME`` and stamped into every
signed envelope so a future rotation can coexist with old signatures.
Raw 32-byte public keys and 64-byte signatures keep the textual forms small.
"""

from __future__ import annotations

from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

SCHEME = "ed25519-jcs-v1"

SIGNATURE_LEN = 64
PUBLIC_KEY_LEN = 32


@dataclass(frozen=True)
class SigningKey:
    """A private key plus its raw public half."""

    private_bytes: bytes
    public_bytes: bytes

    def sign(self, message: bytes) -> bytes:
        key = Ed25519PrivateKey.from_private_bytes(self.private_bytes)
        return key.sign(message)

    @classmethod
    def from_private_bytes(cls, raw: bytes) -> "SigningKey":
        key = Ed25519PrivateKey.from_private_bytes(raw)
        pub = key.public_key().public_bytes(
            serialization.Encoding.Raw, serialization.PublicFormat.Raw
        )
        return cls(private_bytes=raw, public_bytes=pub)


def generate_keypair() -> SigningKey:
    key = Ed25519PrivateKey.generate()
    raw = key.private_bytes(
        serialization.Encoding.Raw,
        serialization.PrivateFormat.Raw,
        serialization.NoEncryption(),
    )
    pub = key.public_key().public_bytes(
        serialization.Encoding.Raw, serialization.PublicFormat.Raw
    )
    return SigningKey(private_bytes=raw, public_bytes=pub)


def keypair_from_seed(seed: bytes) -> SigningKey:
    """Deterministic keypair from a 32-byte seed (fixtures and tests)."""
    if len(seed) != 32:
        raise ValueError("seed must be 32 bytes")
    return SigningKey.from_private_bytes(seed)


def verify_signature(public_key: bytes, message: bytes, signature: bytes) -> bool:
    if len(public_key) != PUBLIC_KEY_LEN or len(signature) != SIGNATURE_LEN:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False
