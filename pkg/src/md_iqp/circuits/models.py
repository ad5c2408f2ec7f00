from __future__ import annotations

import math
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

TWO_PI = 2.0 * math.pi


def canonical_angle(angle: float) -> float:
    """Reduce an angle to ``[0, 2*pi)``."""
    reduced = math.fmod(angle, TWO_PI)
    if reduced < 0:
        reduced += TWO_PI
    return 0.0 if math.isclose(reduced, TWO_PI) else reduced


class _Op(BaseModel):
    model_config = ConfigDict(frozen=True)


class CX(_Op):
    """Controlled-X; flips ``target`` when ``control`` is 1."""

    op: Literal["cx"] = "cx"
    control: int = Field(ge=0)
    target: int = Field(ge=0)

    @model_validator(mode="after")
    def _distinct(self) -> CX:
        if self.control == self.target:
            raise ValueError(f"CX control equals target ({self.control})")
        return self


class H(_Op):
    op: Literal["h"] = "h"
    qubit: int = Field(ge=0)


class RZ(_Op):
    """Diagonal rotation ``exp(i * angle * Z)``.

    Attributes:
        frame: Outcome slots whose parity adds ``pi/2`` to the angle at run time.
    """

    op: Literal["rz"] = "rz"
    qubit: int = Field(ge=0)
    angle: float
    frame: tuple[int, ...] = ()

    @field_validator("angle")
    @classmethod
    def _canonical(cls, v: float) -> float:
        return canonical_angle(v)


class MeasureX(_Op):
    """X-basis measurement of an auxiliary; the outcome is stored in ``slot``."""

    op: Literal["measure_x"] = "measure_x"
    qubit: int = Field(ge=0)
    slot: int = Field(ge=0)


class ResetAux(_Op):
    op: Literal["reset"] = "reset"
    qubit: int = Field(ge=0)


class ZFrame(_Op):
    """Deferred Pauli-Z correction applied when the parity of ``frame`` is odd."""

    op: Literal["z_frame"] = "z_frame"
    qubit: int = Field(ge=0)
    frame: tuple[int, ...]


Instruction = Annotated[
    Union[CX, H, RZ, MeasureX, ResetAux, ZFrame], Field(discriminator="op")
]


class DynamicCircuit(BaseModel):
    """Ordered instruction stream on ``n_system`` system and ``n_aux`` auxiliary qubits.

    System qubits are ``0..n_system-1`` and auxiliaries ``n_system..n_system+n_aux-1``.
    Auxiliaries start in ``|0>``.
    """

    model_config = ConfigDict(frozen=True)

    n_system: int = Field(ge=1)
    n_aux: int = Field(default=0, ge=0)
    instructions: tuple[Instruction, ...] = ()
    metadata: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_indices(self) -> DynamicCircuit:
        total = self.n_system + self.n_aux
        slots: set[int] = set()
        for ins in self.instructions:
            qubits = (ins.control, ins.target) if isinstance(ins, CX) else (ins.qubit,)
            for q in qubits:
                if q >= total:
                    raise ValueError(f"{ins.op} on qubit {q} outside register of {total}")
            if isinstance(ins, (MeasureX, ResetAux)) and ins.qubit < self.n_system:
                raise ValueError(f"{ins.op} must target an auxiliary, got system qubit {ins.qubit}")
            if isinstance(ins, MeasureX):
                if ins.slot in slots:
                    raise ValueError(f"outcome slot {ins.slot} written twice")
                slots.add(ins.slot)
        for ins in self.instructions:
            if isinstance(ins, (RZ, ZFrame)) and any(s not in slots for s in ins.frame):
                raise ValueError(f"{ins.op} on qubit {ins.qubit} reads an unknown outcome slot")
        return self

    @property
    def n_qubits(self) -> int:
        return self.n_system + self.n_aux

    @property
    def n_slots(self) -> int:
        return sum(isinstance(ins, MeasureX) for ins in self.instructions)

    def is_aux(self, q: int) -> bool:
        return q >= self.n_system

    def without_frames(self) -> DynamicCircuit:
        """Copy with every feed-forward frame dropped; measurements are kept."""
        stripped: list[Instruction] = []
        for ins in self.instructions:
            if isinstance(ins, ZFrame):
                continue
            if isinstance(ins, RZ) and ins.frame:
                ins = ins.model_copy(update={"frame": ()})
            stripped.append(ins)
        meta = {**self.metadata, "feed_forward": False}
        return self.model_copy(update={"instructions": tuple(stripped), "metadata": meta})

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    @classmethod
    def from_json(cls, text: str) -> DynamicCircuit:
        return cls.model_validate_json(text)
