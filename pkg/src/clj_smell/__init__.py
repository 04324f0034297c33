"""Static detection of Clojure code smells."""

from .reader import Form, Kind, ReadError, Span, read_forms, render
from .rules import REGISTRY, Diagnostic

__version__ = "0.1.0"

__all__ = ["Diagnostic", "Form", "Kind", "REGISTRY", "ReadError", "Span", "read_forms", "render", "__version__"]
