import math
from typing import Optional, Tuple

from pydantic import Field, computed_field, field_validator, model_validator

from app.schemas import BaseSchema, ResponseSchema
from app.schemas.decoder import DecoderSpec
from app.services.circuit import SpamMode
from app.services.codes import CodeFamily
from app.services.noise import cnot_infidelity

WILSON_Z = 1.96


def wilson_interval(failures: int, shots: int, z: float = WILSON_Z) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if shots <= 0:
        return (0.0, 1.0)
    f = failures / shots
    z2 = z * z
    denom = 1 + z2 / shots
    centre = (f + z2 / (2 * shots)) / denom
    half = z * math.sqrt(f * (1 - f) / shots + z2 / (4 * shots * shots)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


class CodeSpec(BaseSchema):
    """Code family and dimensions; XY families are square."""
    family: CodeFamily = CodeFamily.CSS
    d_x: int = Field(..., ge=3, description="Logical-X distance (row length)")
    d_z: Optional[int] = Field(None, ge=3, description="Logical-Z distance; defaults to d_x")

    @field_validator('d_x', 'd_z')
    @classmethod
    def check_odd(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v % 2 == 0:
            raise ValueError(f"code dimensions must be odd, got {v}")
        return v

    @model_validator(mode='after')
    def check_square(self) -> "CodeSpec":
        if self.family is not CodeFamily.CSS and self.d_z not in (None, self.d_x):
            raise ValueError(f"{self.family.value} codes are square")
        return self

    @property
    def height(self) -> int:
        return self.d_x if self.d_z is None else self.d_z

    @property
    def label(self) -> str:
        return f"{self.family.value}-{self.d_x}x{self.height}"


class ExperimentSpec(BaseSchema):
    """One memory-experiment point: code, noise, decoder and sampling budget."""
    code: CodeSpec
    decoder: DecoderSpec = Field(default_factory=DecoderSpec)
    p: float = Field(..., ge=0.0, le=1.0, description="Noise strength")
    eta: float = Field(1.0, ge=1.0, description="Z bias")
    rounds: Optional[int] = Field(None, ge=1, description="Noisy rounds; defaults to max(d_x, d_z)")
    basis: str = Field("X", pattern="^[XYZ]$")
    spam: SpamMode = SpamMode.PERFECT
    shots: int = Field(..., ge=0)
    seed: Optional[int] = Field(None, ge=0)

    @property
    def resolved_rounds(self) -> int:
        return self.rounds if self.rounds is not None else max(self.code.d_x, self.code.height)

    def key(self) -> Tuple:
        """Identity of a point for checkpoint resume (everything but the shot budget)."""
        return (
            self.code.family.value,
            self.code.d_x,
            self.code.height,
            self.decoder.name.value,
            self.decoder.bp.max_iter,
            self.decoder.bp.variant.value,
            self.p,
            self.eta,
            self.resolved_rounds,
            self.basis,
            self.spam.value,
            self.seed,
        )


class MonteCarloPoint(ResponseSchema):
    """Sampled and decoded result of one ExperimentSpec."""
    spec: ExperimentSpec
    shots: int = Field(..., ge=0)
    failures: int = Field(..., ge=0)
    seed: int
    bp_converged: int = Field(0, ge=0, description="Shots where BP alone decoded the syndrome")
    seconds: float = Field(0.0, ge=0.0)

    @model_validator(mode='after')
    def check_counts(self) -> "MonteCarloPoint":
        if self.failures > self.shots:
            raise ValueError(f"failures ({self.failures}) exceed shots ({self.shots})")
        return self

    @computed_field
    @property
    def failure_rate(self) -> float:
        return self.failures / self.shots if self.shots else 0.0

    @computed_field
    @property
    def standard_error(self) -> float:
        f = self.failure_rate
        return math.sqrt(f * (1 - f) / self.shots) if self.shots else 0.0

    @computed_field
    @property
    def wilson(self) -> Tuple[float, float]:
        return wilson_interval(self.failures, self.shots)

    @property
    def p_cx(self) -> float:
        return cnot_infidelity(self.spec.p, self.spec.eta)

    @property
    def size(self) -> int:
        return self.spec.code.d_x

    @property
    def num_data(self) -> int:
        return self.spec.code.d_x * self.spec.code.height
