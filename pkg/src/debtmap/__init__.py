"""debtmap: business-driven technical debt prioritization.

Models the chain technical debt -> configuration item -> IT asset -> value
source, scores the backlog with configurable priority rules, quantifies
stakeholder agreement, and reports accumulation and payment trends per
business priority.
"""

__version__ = "0.1.0"
