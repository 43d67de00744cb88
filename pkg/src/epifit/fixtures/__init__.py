"""Bundled synthetic case data with a known parameter sheet (see fixtures.toml)."""
