"""Statistical certification of architecture matrices."""
