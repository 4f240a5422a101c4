"""Bundled instance files."""
