from __future__ import annotations


class GlyphMetrics:
    def __init__(self, units_per_em: int, widths: dict[str, int]) -> None:
        self.units_per_em = units_per_em
        self.widths = dict(widths)
        self.usage: dict[str, int] = {}

    def advance_width(self, glyph: str) -> int:
        return self.widths.get(glyph, self.units_per_em // 2)

    def scaled_width(self, glyph: str, size: float) -> float:
        return round(self.widths.get(glyph, 0) * size / self.units_per_em, 3)

    def record_usage(self, glyph: str) -> int:
        self.usage[glyph] = self.usage.get(glyph, 0) + 1
        return self.usage[glyph]
