"""Error type shared by every module.

Each failure carries a symbolic ``code`` (``ELLIPTICITY_VIOLATION``,
``INERTIA_BREAKDOWN`` ...) so callers and the CLI can branch on it without
parsing messages.
"""

from __future__ import annotations

# Codes that signal a violated mathematical identity rather than misuse.
IDENTITY_CODES = frozenset({"THEOREM_VIOLATION", "SMALE_VIOLATION", "CONVERSE_VIOLATION"})


class ConjscanError(Exception):
    def __init__(self, code: str, message: str = "", **context):
        self.code = code
        self.context = context
        text = f"{code}: {message}" if message else code
        if context:
            detail = ", ".join(f"{k}={v!r}" for k, v in context.items())
            text = f"{text} ({detail})"
        super().__init__(text)

    @property
    def is_identity_violation(self) -> bool:
        return self.code in IDENTITY_CODES
