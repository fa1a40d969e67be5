"""
Toolchain error types.

Every failure the pipeline reports carries a short code (E-...) so the CLI,
the HTTP front end and the tests can tell failures apart without parsing
messages.
"""

from typing import List, Optional


class ToolchainError(Exception):
    """A pipeline failure identified by a short error code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


class ParseError(ToolchainError):
    """Raised by the SVL/SAL/SDL parsers with the offending source span."""

    def __init__(self, span, message: str, expected: Optional[List[str]] = None):
        super().__init__("E-PARSE", message)
        self.span = span
        self.expected = list(expected or [])

    def __str__(self) -> str:
        text = f"{self.span}: {self.message}"
        if self.expected:
            text += f" (expected one of: {', '.join(self.expected)})"
        return text
