"""Smell detectors and the rule registry."""

from .base import CATEGORIES, SEVERITIES, Diagnostic, FileContext, RuleDescriptor, severity_policy
from .registry import CATALOG_SIZE, OUT_OF_SCOPE, PSEUDO_RULES, REGISTRY

__all__ = [
    "CATALOG_SIZE", "CATEGORIES", "OUT_OF_SCOPE", "PSEUDO_RULES", "REGISTRY", "SEVERITIES",
    "Diagnostic", "FileContext", "RuleDescriptor", "severity_policy",
]
