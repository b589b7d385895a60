from __future__ import annotations

from typing import NamedTuple, Optional


class NameRecord(NamedTuple):
    name_id: int
    platform_id: int
    encoding_id: int
    language_id: int
    value: str


class NamingTable:
    """The font 'name' table: strings keyed by name, platform, encoding and language."""

    def __init__(self, records: list[NameRecord]) -> None:
        self.lookup_table: dict[int, dict[int, dict[int, dict[int, str]]]] = {}
        for record in records:
            self._index(record)

    @classmethod
    def from_tuples(cls, rows: list[tuple[int, int, int, int, str]]) -> "NamingTable":
        return cls([NameRecord(*row) for row in rows])

    @staticmethod
    def is_unicode_platform(platform_id: int) -> bool:
        return platform_id in (0, 3)

    def _index(self, record: NameRecord) -> None:
        platforms = self.lookup_table.setdefault(record.name_id, {})
        encodings = platforms.setdefault(record.platform_id, {})
        languages = encodings.setdefault(record.encoding_id, {})
        languages[record.language_id] = record.value

    def get_name(self, name_id: int, platform_id: int, encoding_id: int, language_id: int) -> Optional[str]:
        platforms = self.lookup_table.get(name_id)
        if platforms is None:
            return None
        encodings = platforms.get(platform_id)
        if encodings is None:
            return None
        languages = encodings.get(encoding_id)
        if languages is None:
            return None
        return languages.get(language_id)

    def get_font_family(self) -> Optional[str]:
        family = self.get_name(1, 3, 1, 0x409)
        if family is None:
            family = self.get_name(1, 1, 0, 0)
        return family

    def name_count(self) -> int:
        count = 0
        for platforms in self.lookup_table.values():
            for encodings in platforms.values():
                for languages in encodings.values():
                    count += len(languages)
        return count

    def find_record(self, name_id: int, platform_id: int) -> Optional[NameRecord]:
        for encoding_id, languages in self.lookup_table.get(name_id, {}).get(platform_id, {}).items():
            for language_id, value in languages.items():
                return NameRecord(name_id, platform_id, encoding_id, language_id, value)
        return None
