"""Exception types shared across the package.

Every error carries a short machine-readable ``code`` so the CLI can emit
it in JSON without parsing message text.
"""


class AmlabError(Exception):
    code = "error"


class SchemeConfigError(AmlabError, ValueError):
    """Invalid scheme family or parameters."""

    code = "scheme-config"


class CodePredicateError(AmlabError, ValueError):
    """The vector is not a code: it is a point mass or lies in the span
    of the all-ones vector."""

    code = "code-predicate"


class BudgetExceeded(AmlabError, RuntimeError):
    """A brute-force oracle would exceed its elementary-step budget."""

    code = "budget-exceeded"

    def __init__(self, message, needed=None, budget=None):
        super().__init__(message)
        self.needed = needed
        self.budget = budget


class CatalogUnavailable(AmlabError, RuntimeError):
    """No module catalog source (closed form or dense lab) applies."""

    code = "catalog-unavailable"


class HypothesisUnverifiable(AmlabError, RuntimeError):
    """A theorem hypothesis cannot be certified for this scheme."""

    code = "hypothesis-unverifiable"


class ParseError(AmlabError, ValueError):
    """Malformed code file.  Carries the offending line number."""

    code = "parse-error"

    def __init__(self, message, lineno=None):
        super().__init__(message if lineno is None else f"line {lineno}: {message}")
        self.lineno = lineno
