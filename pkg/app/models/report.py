from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field, model_validator

from app.models.series_schema import LaurentPolyPayload


class CheckStatus(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"


class Divergence(BaseModel):
    degree: int = Field(..., ge=0, description="First Q-degree where the two sides differ")
    expected: LaurentPolyPayload
    actual: LaurentPolyPayload


class CheckReport(BaseModel):
    name: str
    status: CheckStatus
    runtime_ms: int = Field(0, ge=0)
    first_divergence: Optional[Divergence] = None
    agreed_through: Optional[int] = Field(
        None, description="Largest Q-degree up to which every compared pair agrees"
    )
    budget_exhausted: bool = False
    detail: Optional[str] = None

    @model_validator(mode="after")
    def failure_has_divergence(self):
        if self.status == CheckStatus.FAIL and self.first_divergence is None:
            raise ValueError(f"Check {self.name} failed without a reported divergence")
        return self

    @property
    def passed(self) -> bool:
        return self.status == CheckStatus.PASS
