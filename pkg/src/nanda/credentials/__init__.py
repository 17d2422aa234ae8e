from nanda.credentials.claims import (
    ClaimType,
    Verdict,
    VerifiableClaim,
    sign_claim,
    verify_claim,
)
from nanda.credentials.keys import SigningKey, generate_keypair, verify_signature
from nanda.credentials.status_list import StatusList, StatusListStore, revoke
from nanda.credentials.trust import (
    IssuerEntry,
    IssuerRole,
    TrustStore,
    TrustZone,
    check_cross_trust,
    cross_trust_depth,
)

__all__ = [
    "ClaimType",
    "IssuerEntry",
    "IssuerRole",
    "SigningKey",
    "StatusList",
    "StatusListStore",
    "TrustStore",
    "TrustZone",
    "Verdict",
    "VerifiableClaim",
    "check_cross_trust",
    "cross_trust_depth",
    "generate_keypair",
    "revoke",
    "sign_claim",
    "verify_claim",
    "verify_signature",
]
