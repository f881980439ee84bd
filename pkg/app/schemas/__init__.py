"""
Schemas package.

This package contains Pydantic models for every record that crosses a
boundary: API responses, CLI output and checkpoint files.
"""
from typing import Generic, List, TypeVar

from pydantic import BaseModel, ConfigDict

RowType = TypeVar("RowType")


class BaseSchema(BaseModel):
    """Base schema with common configuration."""

    model_config = ConfigDict(
        from_attributes=True,
        validate_by_name=True,
        str_strip_whitespace=True,
        arbitrary_types_allowed=True,
    )


class ResponseSchema(BaseSchema):
    """Base response schema for API and CLI output."""
    pass


class TableResponse(BaseModel, Generic[RowType]):
    """
    Generic tabular response.

    Attributes:
        rows: One entry per table row
        total: Number of rows
    """
    rows: List[RowType]
    total: int

    model_config = ConfigDict(
        validate_by_name=True,
        json_schema_extra={"example": {"rows": [], "total": 0}},
    )
