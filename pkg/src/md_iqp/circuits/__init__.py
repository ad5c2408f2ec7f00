"""Dynamic circuits, fan-out staircases and effective IQP extraction."""
