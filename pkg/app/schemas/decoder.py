from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from app.core.config import get_settings

settings = get_settings()


class BPVariant(str, Enum):
    SUM_PRODUCT = "sum_product"
    MIN_SUM = "min_sum"


class DecoderName(str, Enum):
    MWPM = "mwpm"
    UF = "uf"
    BELIEF_MATCHING = "belief-matching"
    BELIEF_FIND = "belief-find"

    @property
    def uses_bp(self) -> bool:
        return self in (DecoderName.BELIEF_MATCHING, DecoderName.BELIEF_FIND)

    @property
    def matcher(self) -> "DecoderName":
        """The matching back end: MWPM or weighted union-find."""
        if self in (DecoderName.UF, DecoderName.BELIEF_FIND):
            return DecoderName.UF
        return DecoderName.MWPM


class BPConfig(BaseModel):
    """Belief-propagation parameters."""
    model_config = ConfigDict(frozen=True)

    max_iter: int = Field(default_factory=lambda: settings.BP_MAX_ITER, ge=1, description="Iteration cap")
    variant: BPVariant = Field(default_factory=lambda: BPVariant(settings.BP_VARIANT))
    min_sum_scale: float = Field(default_factory=lambda: settings.BP_MIN_SUM_SCALE, gt=0, le=1)
    llr_clamp: float = Field(default_factory=lambda: settings.BP_LLR_CLAMP, gt=0, description="LLR magnitude bound")
    early_stop: bool = Field(True, description="Stop at the first iteration whose hard decision reproduces the syndrome")


class DecoderSpec(BaseModel):
    """Decoder choice plus its BP parameters."""
    model_config = ConfigDict(frozen=True)

    name: DecoderName = DecoderName.MWPM
    bp: BPConfig = Field(default_factory=BPConfig)
