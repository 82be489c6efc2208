"""Error types shared across the analyzers.

Every failure that callers are expected to branch on carries a stable
string code (e.g. "NON_WELL_FOUNDED") next to the human-readable message,
so the CLI can map failures to report fields without string matching.
"""


class AnalysisError(Exception):
    """Base error with a stable machine-readable code and diagnostics dict."""

    code = "ANALYSIS_ERROR"

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.message = message
        self.diagnostics = diagnostics

    def __str__(self):
        if self.diagnostics:
            extra = ", ".join(f"{k}={v}" for k, v in sorted(self.diagnostics.items()))
            return f"[{self.code}] {self.message} ({extra})"
        return f"[{self.code}] {self.message}"


class ParseError(AnalysisError):
    """Equation text rejected; diagnostics carry position and expectation."""

    code = "PARSE_ERROR"


class NonWellFoundedError(AnalysisError):
    """A coefficient depends on itself at the same grade of the recursion."""

    code = "NON_WELL_FOUNDED"


class TruncationUnstableError(AnalysisError):
    """Evaluation at u=1 changed when the catalytic order was enlarged."""

    code = "U_TRUNCATION_UNSTABLE"


class NoConvergenceError(AnalysisError):
    """An iterative solve (Newton or continuation) failed to converge."""

    code = "NO_CONVERGENCE"


class FitUnstableError(AnalysisError):
    """Singular-expansion fit did not reproduce held-out data points."""

    code = "FIT_UNSTABLE"


class StencilInconsistentError(AnalysisError):
    """Finite-difference derivative estimates disagree across step sizes."""

    code = "STENCIL_INCONSISTENT"


class NegativeCoordinateError(AnalysisError):
    """Continuation left the positive cone; generic mode is required."""

    code = "NEGATIVE_COORDINATE"


class Y1NonzeroError(AnalysisError):
    """The half-power term below (1-z/z0)^{3/2} failed to vanish."""

    code = "Y1_NONZERO"


class NotApplicableError(AnalysisError):
    """The requested analysis does not apply to this equation class."""

    code = "NOT_APPLICABLE"


class UnknownEntryError(AnalysisError):
    """Corpus lookup for a name that is not registered."""

    code = "UNKNOWN_ENTRY"
