"""Process-wide font program cache, filled by the application at startup."""
from __future__ import annotations

_SOFT_CACHE: dict[str, str] = {}


def warm(programs: dict[str, str]) -> None:
    _SOFT_CACHE.update(programs)


class FontCache:
    def __init__(self, default_font: str = "Helvetica") -> None:
        self.default_font = default_font

    def get_font(self, name: str) -> str:
        program = _SOFT_CACHE.get(name)
        if program is None:
            return self.default_font
        return program
