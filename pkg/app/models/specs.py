from math import gcd
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

Family = Literal["xvyv", "xyv", "x2yv", "xvm1yv", "xvm2yv"]

SUPPORTED_FAMILIES = "u = v, u = 1, u = 2, u = v-1, u = v-2"


def curve_family(u: int, v: int):
    """
    Family of x^u y^v, resolved in the order u=v, u=1, u=2, u=v-1, u=v-2.
    None when no formula covers the pair.
    """
    if u == v:
        return "xvyv"
    if u == 1:
        return "xyv"
    if u == 2:
        return "x2yv"
    if u == v - 1:
        return "xvm1yv"
    if u == v - 2:
        return "xvm2yv"
    return None


class CurveSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    u: int = Field(..., ge=1, description="Exponent of x")
    v: int = Field(..., ge=1, description="Exponent of y")

    @model_validator(mode="after")
    def supported_pair(self):
        if self.u > self.v:
            raise ValueError(f"Expected u <= v, got u={self.u}, v={self.v}")
        if curve_family(self.u, self.v) is None:
            raise ValueError(
                f"No formula for x^{self.u} y^{self.v}; supported families: {SUPPORTED_FAMILIES}"
            )
        return self

    @property
    def family(self) -> Family:
        return curve_family(self.u, self.v)


class TorusLinkSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    mA: int = Field(..., ge=1)
    mB: int = Field(..., ge=1)
    color_v: int = Field(..., ge=1, description="Row length of the Sym^v colour")

    @computed_field
    @property
    def d(self) -> int:
        return gcd(self.mA, self.mB)


class BinaryPair(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: str = Field("", pattern=r"^[01]*$")
    w: str = Field("", pattern=r"^[01]*$")

    @model_validator(mode="after")
    def equal_ones(self):
        if self.t.count("1") != self.w.count("1"):
            raise ValueError(
                f"Strings {self.t!r} and {self.w!r} have different numbers of 1s"
            )
        return self

    def key(self):
        return (self.t, self.w)
