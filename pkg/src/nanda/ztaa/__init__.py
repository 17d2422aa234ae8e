from nanda.ztaa.nsa import NsaAssessment, NsaConfig, NsaTier, assess_nsa
from nanda.ztaa.policy import NsaRule, PolicyDecision, ZtaaPolicy, evaluate_policy
from nanda.ztaa.handshake import (
    ChallengeResponse,
    FactsVerdict,
    HandshakeOutcome,
    HandshakeSession,
    HandshakeState,
    PeerVerifiedUs,
    PolicyVerdict,
    ResolveFail,
    ResolveOk,
    bilateral_handshake,
    challenge_message,
    new_session,
    step,
)

__all__ = [
    "ChallengeResponse",
    "FactsVerdict",
    "HandshakeOutcome",
    "HandshakeSession",
    "HandshakeState",
    "NsaAssessment",
    "NsaConfig",
    "NsaRule",
    "NsaTier",
    "PeerVerifiedUs",
    "PolicyDecision",
    "PolicyVerdict",
    "ResolveFail",
    "ResolveOk",
    "ZtaaPolicy",
    "assess_nsa",
    "bilateral_handshake",
    "challenge_message",
    "evaluate_policy",
    "new_session",
    "step",
]
