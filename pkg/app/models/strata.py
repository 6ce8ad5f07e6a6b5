from enum import Enum
from typing import List, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class LayerKind(str, Enum):
    ONE = "ONE"  # two shaded end boxes
    TWO = "TWO"  # all boxes solid


class Layer(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: LayerKind
    i: int = Field(..., ge=1, description="Horizontal arm length")
    j: int = Field(..., ge=1, description="Vertical arm length")

    @property
    def boxes(self) -> int:
        """
        Solid boxes plus half the shaded ones: i + j for a ONE layer, i + j - 1 for TWO.
        """
        return self.i + self.j if self.kind == LayerKind.ONE else self.i + self.j - 1

    def as_row(self) -> Tuple[str, int, int]:
        return (self.kind.value, self.i, self.j)


class WeakDiagonalPartition(BaseModel):
    """
    Layers ordered from the outermost (index 0) to the innermost.

    Construction does not enforce the adjacency rules; use
    ``partitions.wdp_validate`` for that.
    """

    model_config = ConfigDict(frozen=True)

    layers: Tuple[Layer, ...] = ()

    @classmethod
    def from_rows(cls, rows) -> "WeakDiagonalPartition":
        return cls(layers=tuple(Layer(kind=LayerKind(kind), i=i, j=j) for kind, i, j in rows))

    def kinds(self) -> Tuple[LayerKind, ...]:
        return tuple(layer.kind for layer in self.layers)

    def rows(self) -> List[Tuple[str, int, int]]:
        return [layer.as_row() for layer in self.layers]

    def __len__(self) -> int:
        return len(self.layers)


class StratumStats(BaseModel):
    n: int = Field(..., ge=0, description="Total boxes")
    m1: int = Field(..., ge=0, description="Torus factors (A - pt)")
    m2: int = Field(..., ge=0, description="Affine factors A")


class StratumRecord(BaseModel):
    """
    One line of the `enumerate` output for the diagonal stratification.
    """

    layers: List[Tuple[str, int, int]]
    n: int
    m1: int
    m2: int
    contribution: str


class VerticalStratum(BaseModel):
    model_config = ConfigDict(frozen=True)

    parts: Tuple[int, ...] = ()
    u: Literal[1, 2]
    v: int = Field(..., ge=1)

    @field_validator("parts")
    @classmethod
    def parts_weakly_decreasing(cls, parts):
        if any(p < 1 for p in parts):
            raise ValueError("Parts must be positive")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError("Parts must be weakly decreasing")
        return parts

    @model_validator(mode="after")
    def tail_bounded_by_u(self):
        if any(p > self.u for p in self.parts[self.v:]):
            raise ValueError(f"Rows from index {self.v} on must have length at most {self.u}")
        return self

    @property
    def n(self) -> int:
        return sum(self.parts)


class VerticalRecord(BaseModel):
    parts: List[int]
    u: int
    v: int
    n: int
    dim: int
    contribution: str
