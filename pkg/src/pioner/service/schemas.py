"""Request/response models for the captioning service."""
from __future__ import annotations

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class UploadResponse(BaseModel):
    image_id: str
    grid_rows: int
    grid_cols: int
    width: int
    height: int
    cached: bool = False


class CaptionRequest(BaseModel):
    region: Dict[str, Any]
    aggregation: Optional[str] = None
    return_weights: bool = False


class RegionWeights(BaseModel):
    indices: List[int]
    weights: List[float]


class CaptionResponse(BaseModel):
    caption: str
    score: Optional[float] = None
    empty: bool = False
    weights: Optional[RegionWeights] = None


class HealthResponse(BaseModel):
    status: str = Field(pattern="^(ok|degraded)$")
    backbone: bool
    checkpoint: bool
    bank: bool
    cache_entries: int
    cache_bytes: int
