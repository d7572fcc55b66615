"""HTTP captioning service: register an image once, caption many regions."""
from __future__ import annotations

import base64
import binascii
import hashlib
import json
import logging
from typing import Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware

from ..backbones import BackboneAdapter, decode_image
from ..config import AGGREGATION_MODES, Config
from ..decoder import CaptionPipeline, DecoderCheckpoint
from ..errors import (
    BackboneError,
    DegenerateWeightError,
    EmptySelectionError,
    ModeError,
    PionerError,
    SchemaError,
    ValidationError,
)
from ..gap import MemoryBank
from ..regionspec import parse_region_spec
from .cache import AdmissionGate, EntryTooLarge, GridCache, GridCacheEntry, grid_nbytes
from .schemas import CaptionRequest, CaptionResponse, HealthResponse, RegionWeights, UploadResponse

log = logging.getLogger(__name__)


def create_app(
    config: Config,
    adapter: BackboneAdapter,
    checkpoint: Optional[DecoderCheckpoint] = None,
    bank: Optional[MemoryBank] = None,
) -> FastAPI:
    app = FastAPI(title="pioner captioning service", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[config.service_cors_origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    pipeline = None
    if checkpoint is not None:
        pipeline = CaptionPipeline(
            adapter,
            checkpoint,
            bank=bank,
            aggregation=config.aggregation,
            strategy=config.decoder_strategy,
            beam_width=config.decoder_beam_width,
            max_len=config.decoder_max_len,
        )

    cache = GridCache(config.service_cache_bytes)
    gate = AdmissionGate(config.service_workers, config.service_queue)
    app.state.cache = cache
    app.state.gate = gate
    app.state.pipeline = pipeline
    app.state.adapter = adapter

    @app.post("/v1/images", response_model=UploadResponse)
    async def register_image(request: Request) -> UploadResponse:
        raw = await request.body()
        if request.headers.get("content-type", "").startswith("application/json"):
            raw = _decode_json_image(raw)
        if not raw:
            raise HTTPException(status_code=400, detail="empty image body")
        if len(raw) > config.service_max_image_bytes:
            raise HTTPException(
                status_code=413,
                detail=f"image exceeds {config.service_max_image_bytes} bytes",
            )
        image_id = hashlib.sha256(raw).hexdigest()

        def encode() -> GridCacheEntry:
            try:
                pixels = decode_image(raw)
                grid = adapter.encode_image(pixels)
            except BackboneError as e:
                raise HTTPException(status_code=400, detail=f"undecodable image: {e}")
            return GridCacheEntry(
                image_id=image_id,
                grid=grid,
                width=pixels.size[0],
                height=pixels.size[1],
                size_bytes=grid_nbytes(grid),
            )

        try:
            entry, was_cached = cache.get_or_create(image_id, encode)
        except EntryTooLarge as e:
            raise HTTPException(status_code=413, detail=str(e))
        return UploadResponse(
            image_id=entry.image_id,
            grid_rows=entry.grid.rows,
            grid_cols=entry.grid.cols,
            width=entry.width,
            height=entry.height,
            cached=was_cached,
        )

    @app.post("/v1/images/{image_id}/caption", response_model=CaptionResponse)
    def caption_region(image_id: str, body: CaptionRequest) -> CaptionResponse:
        entry = cache.get(image_id)
        if entry is None:
            raise HTTPException(
                status_code=404,
                detail=f"unknown image id {image_id!r}; upload it via POST /v1/images",
            )
        if pipeline is None:
            raise HTTPException(status_code=503, detail="no decoder checkpoint loaded")
        aggregation = body.aggregation
        if aggregation is not None and aggregation not in AGGREGATION_MODES:
            raise HTTPException(
                status_code=422, detail=f"unknown aggregation {aggregation!r}"
            )
        try:
            spec = parse_region_spec(body.region)
        except (SchemaError, ValidationError) as e:
            raise HTTPException(status_code=422, detail=f"invalid region: {e}")

        if not gate.try_enter():
            raise HTTPException(status_code=429, detail="captioning queue is full")
        try:
            caption, selection = pipeline.caption_grid(
                entry.grid,
                (entry.width, entry.height),
                spec,
                aggregation=aggregation,
                return_selection=True,
            )
        except (ModeError, DegenerateWeightError, EmptySelectionError, ValidationError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        except PionerError as e:
            log.exception("caption failed for %s", image_id)
            raise HTTPException(status_code=500, detail=f"caption failed: {e}")
        finally:
            gate.leave()

        weights = None
        if body.return_weights:
            weights = RegionWeights(
                indices=list(selection.indices), weights=list(selection.weights)
            )
        return CaptionResponse(
            caption=caption.text, score=caption.score, empty=caption.empty, weights=weights
        )

    @app.get("/v1/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        ready = pipeline is not None
        return HealthResponse(
            status="ok" if ready else "degraded",
            backbone=True,
            checkpoint=checkpoint is not None,
            bank=bank is not None,
            cache_entries=len(cache),
            cache_bytes=cache.total_bytes,
        )

    @app.get("/v1/config")
    def config_snapshot() -> dict:
        return config.redacted()

    return app


def _decode_json_image(raw: bytes) -> bytes:
    try:
        body = json.loads(raw)
        encoded = body["image_b64"]
        return base64.b64decode(encoded, validate=True)
    except (json.JSONDecodeError, KeyError, TypeError, binascii.Error) as e:
        raise HTTPException(
            status_code=400, detail=f"expected JSON body with base64 'image_b64': {e}"
        )
