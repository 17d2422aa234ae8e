from __future__ import annotations

import pytest

from nanda.agentfacts.encoding import b58check_decode, b58check_encode
from nanda.agentfacts.ids import (
    AgentId,
    did_for_public_key,
    parse_agent_id,
    parse_did,
)
from nanda.agentfacts.iso3166 import alpha2_codes
from nanda.agentfacts.model import AgentFactsDoc, validate_doc
from nanda.errors import DomainError

from conftest import make_doc, seeded_key


class TestAgentId:
    def test_parse_basic(self):
        aid = parse_agent_id("agent://edu/tutor-1")
        assert aid == AgentId(zone="edu", name="tutor-1")
        assert aid.urn == "agent://edu/tutor-1"

    def test_round_trip_is_byte_identical(self):
        for urn in ("agent://a/b", "agent://ed-u.x/tutor.v2", "agent://0/9"):
            assert parse_agent_id(urn).urn == urn

    def test_uppercase_rejected_with_offset(self):
        with pytest.raises(DomainError) as err:
            parse_agent_id("agent://EDU/tutor")
        assert err.value.code == "MALFORMED_AGENT_ID"
        assert err.value.details["offset"] == len("agent://")

    def test_wrong_scheme_rejected(self):
        with pytest.raises(DomainError) as err:
            parse_agent_id("agents://edu/tutor")
        assert err.value.details["offset"] == 5

    @pytest.mark.parametrize("n,ok", [(1, True), (64, True), (65, False)])
    def test_name_length_boundary(self, n, ok):
        urn = f"agent://zone/{'a' * n}"
        if ok:
            assert parse_agent_id(urn).name == "a" * n
        else:
            with pytest.raises(DomainError):
                parse_agent_id(urn)

    @pytest.mark.parametrize("n,ok", [(1, True), (64, True), (65, False)])
    def test_zone_length_boundary(self, n, ok):
        urn = f"agent://{'z' * n}/name"
        if ok:
            assert parse_agent_id(urn).zone == "z" * n
        else:
            with pytest.raises(DomainError):
                parse_agent_id(urn)

    def test_missing_name_rejected(self):
        for bad in ("agent://edu", "agent://edu/", "agent:///x"):
            with pytest.raises(DomainError):
                parse_agent_id(bad)

    def test_equality_is_urn_equality(self):
        assert parse_agent_id("agent://a/b") == parse_agent_id("agent://a/b")
        assert parse_agent_id("agent://a/b") != parse_agent_id("agent://a/c")


class TestBase58Check:
    def test_round_trip(self):
        for payload in (b"\x00" * 5, b"hello world", bytes(range(32))):
            assert b58check_decode(b58check_encode(payload)) == payload

    def test_checksum_detects_corruption(self):
        text = b58check_encode(bytes(range(32)))
        corrupted = ("2" if text[0] != "2" else "3") + text[1:]
        with pytest.raises(ValueError):
            b58check_decode(corrupted)


class TestDid:
    def test_key_binding_round_trip(self):
        key = seeded_key("did-test")
        did = did_for_public_key(key.public_bytes)
        assert did.method == "nanda"
        assert parse_did(str(did)) == did
        assert did.matches_public_key(key.public_bytes)
        assert not did.matches_public_key(seeded_key("other").public_bytes)
        assert len(did.key_digest()) == 32

    def test_web_method(self):
        did = parse_did("did:web:issuer.example.com")
        assert did.method == "web"
        assert str(did) == "did:web:issuer.example.com"

    def test_malformed_rejected(self):
        for bad in ("did:nanda", "urn:x:y", "did:unknown:abc", "did:web:UPPER.example"):
            with pytest.raises(DomainError):
                parse_did(bad)

    def test_nanda_identifier_must_decode_to_32_bytes(self):
        short = b58check_encode(b"\x01\x02\x03")
        with pytest.raises(DomainError):
            parse_did(f"did:nanda:{short}")


class TestValidateDoc:
    def test_minimal_valid_doc(self):
        assert validate_doc(make_doc()) == []

    def test_duplicate_capability(self):
        doc = make_doc(capabilities=("education.tutoring", "education.tutoring"))
        codes = {v.code for v in validate_doc(doc)}
        assert "DUP_CAPABILITY" in codes

    def test_unknown_region(self):
        doc = make_doc(regions=("XX",))
        codes = {v.code for v in validate_doc(doc)}
        assert "BAD_REGION" in codes

    def test_every_assigned_region_accepted(self):
        assert len(alpha2_codes()) == 249
        doc = make_doc(regions=("DE", "US"))
        assert validate_doc(doc) == []

    def test_unsorted_sets_flagged(self):
        doc = make_doc(capabilities=("travel.booking", "education.tutoring"))
        codes = {v.code for v in validate_doc(doc)}
        assert "UNSORTED_CAPABILITIES" in codes

    def test_active_doc_requires_endpoint(self):
        doc = make_doc(endpoints=())
        codes = {v.code for v in validate_doc(doc)}
        assert "NO_ENDPOINT" in codes

    def test_duplicate_endpoint_priority(self):
        base = make_doc()
        ep = base.endpoints[0]
        doc = base.with_(endpoints=(ep, ep.__class__(ep.protocol, "https://x.example/", 0)))
        codes = {v.code for v in validate_doc(doc)}
        assert "DUP_PRIORITY" in codes

    def test_non_https_url(self):
        base = make_doc()
        ep = base.endpoints[0]
        doc = base.with_(endpoints=(ep.__class__(ep.protocol, "http://x.example/", 0),))
        codes = {v.code for v in validate_doc(doc)}
        assert "BAD_URL" in codes

    def test_validation_is_pure(self):
        doc = make_doc(capabilities=("b", "a"))
        first = validate_doc(doc)
        second = validate_doc(doc)
        assert first == second
        assert doc.capabilities == ("b", "a")

    def test_json_round_trip(self):
        doc = make_doc(regions=("DE", "US"), content_flags=("political",))
        body = doc.to_json_dict()
        assert AgentFactsDoc.from_json_dict(body) == doc
