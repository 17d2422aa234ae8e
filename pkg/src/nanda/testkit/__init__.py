"""Fixture generators and independent oracles for the test suite.

The oracle module deliberately imports nothing from ``nanda.safesearch`` or
``nanda.ztaa``: equivalence tests between the engine and the oracle are only
meaningful while the two share no predicate code (a test enforces that rule
on this package's imports).
"""

from nanda.testkit.scenario import Scenario, Universe, generate
from nanda.testkit.oracle import brute_force_search

__all__ = ["Scenario", "Universe", "brute_force_search", "generate"]
