"""API package for md_iqp."""
