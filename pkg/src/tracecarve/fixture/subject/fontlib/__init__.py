"""Font table lookups."""
