from nanda.avc.records import (
    AuditOutcome,
    AuditRecord,
    RecordKind,
    chain_records,
    verify_record_chain,
)
from nanda.avc.ledger import (
    AvcLedger,
    BillingLine,
    BillingSummary,
    ControlAction,
    HistoryPage,
    legal_transition,
)

__all__ = [
    "AuditOutcome",
    "AuditRecord",
    "AvcLedger",
    "BillingLine",
    "BillingSummary",
    "ControlAction",
    "HistoryPage",
    "RecordKind",
    "chain_records",
    "legal_transition",
    "verify_record_chain",
]
