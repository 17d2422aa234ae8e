"""Domain-error to HTTP mapping.

Module error codes surface verbatim in the response body; the status class
is fixed per code so clients can rely on both.
"""

from __future__ import annotations

import logging
import uuid

from nanda.errors import DomainError

logger = logging.getLogger("nanda.service")

CODE_STATUS: dict[str, int] = {
    # 400: the request itself is malformed
    "MALFORMED_AGENT_ID": 400,
    "BAD_DID": 400,
    "INVALID_DOC": 400,
    "INVALID_CLAIM": 400,
    "INVALID_RECORD": 400,
    "UNKNOWN_PARAM": 400,
    "BAD_VALUE": 400,
    "BAD_CURSOR": 400,
    "BAD_REQUEST": 400,
    "NON_CANONICALIZABLE": 400,
    "SCHEMA_VIOLATION": 400,
    "EXTENSION_COLLISION": 400,
    # 401: who are you
    "AUTH_REQUIRED": 401,
    "TOKEN_INVALID": 401,
    "TOKEN_EXPIRED": 401,
    # 403: you, but not yours
    "NOT_OWNER": 403,
    "NOT_AUTHORIZED": 403,
    "UNAUTHORIZED_ROLE": 403,
    "SIGNER_MISMATCH": 403,
    "KEY_UNKNOWN": 403,
    # 404
    "NOT_FOUND": 404,
    "UNKNOWN_ZONE": 404,
    # 409: lost a race or a uniqueness rule
    "ALREADY_EXISTS": 409,
    "VERSION_CONFLICT": 409,
    "STATUS_LIST_REGRESSION": 409,
    # 422: well-formed but semantically impossible
    "TERMINATED_IMMUTABLE": 422,
    "ILLEGAL_TRANSITION": 422,
    "ILLEGAL_EVENT": 422,
    "TIME_INVERSION": 422,
    "CLOCK_SKEW": 422,
    "UNREPRESENTABLE": 422,
    # 429
    "RATE_LIMITED": 429,
}


def error_response(err: DomainError) -> tuple[int, dict]:
    status = CODE_STATUS.get(err.code, 500)
    body = {"error": err.to_json_dict()}
    if status >= 500:
        correlation_id = str(uuid.uuid4())
        body["correlation_id"] = correlation_id
        logger.error("internal error %s: %s", correlation_id, err, exc_info=True)
    return status, body
