"""NANDA: a verifiable agent registry and zero-trust collaboration toolkit.

Subpackages:
  agentfacts   -- agent identity, the AgentFacts document model, canonical bytes
  credentials  -- claim signing/verification, trust zones, status-list revocation
  index_core   -- the event-sourced registry (CRUD, resolution, replay)
  safesearch   -- filtered discovery over the registry
  ztaa         -- zero-trust handshake state machine and policy engine
  adapter      -- cross-dialect descriptor translation
  avc          -- tamper-evident audit history, control actions, billing
  service      -- the HTTP facade binding everything together
  cli          -- the `nanda` command-line client
  testkit      -- fixture generators and independent oracles for the test suite
"""

__version__ = "0.1.0"
