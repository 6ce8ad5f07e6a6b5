from typing import List, Tuple, Union

from pydantic import BaseModel, Field


class LaurentPolyPayload(BaseModel):
    terms: List[Tuple[int, int, int, str]] = Field(
        default_factory=list,
        description="[q, t, a, coeff] entries, ascending in q then t then a; coeff as a decimal string",
    )


CoefficientEntry = Union[Tuple[int, str], Tuple[int, int, str]]


class QSeriesPayload(BaseModel):
    nmax: int = Field(..., ge=0, description="Truncation Q-degree")
    coeffs: List[Tuple[int, List[CoefficientEntry]]] = Field(
        default_factory=list,
        description="[n, [[t, coeff], ...]] per Q-degree; [t, a, coeff] when the series carries a",
    )
