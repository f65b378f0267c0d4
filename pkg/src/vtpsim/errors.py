from __future__ import annotations


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


class TrackError(ValueError):
    """Malformed track file or track geometry."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
