from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field


class ExperimentInfo(BaseModel):
    """Registered experiment.

    Attributes:
        name: Registry key used in run requests.
        description: One-line summary.
    """

    name: str
    description: str


class ExperimentRunRequest(BaseModel):
    """Run request; mirrors an experiment config file."""

    name: str = Field(min_length=1, description="Registered experiment name.")
    params: dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(default=0, ge=0, lt=2**64, description="Master seed.")
    threads: int = Field(default=1, ge=1, le=64)


class ExperimentRunResponse(BaseModel):
    run_dir: str
    status: int
    passed: bool | None = None
    files: dict[str, str] = Field(description="File name to SHA-256 of its content.")
