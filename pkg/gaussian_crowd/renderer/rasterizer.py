"""
Tile-based front-to-back splat compositing.

Every path (tiled, naive reference) runs the same kernel: alpha for a block of
(splat, pixel) pairs, transmittance by a sequential running product and color by a
sequential running sum. Splats that do not cover a pixel contribute alpha 0, which is
an exact no-op on both running values, so the tiled result is bit-identical to the
all-splats-per-pixel loop.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from gaussian_crowd.constants import RASTER_CHUNK_SPLATS
from gaussian_crowd.core.gaussian_math import F32, gaussian_alpha
from gaussian_crowd.errors import InvalidInputError
from gaussian_crowd.renderer.splats import RenderSettings, SplatFrame, sort_splats

REFERENCE_PIXEL_BLOCK = 4096


@dataclass(frozen=True, eq=False)
class Framebuffer:
    """Linear RGB, float32, row-major (height, width, 3)"""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=F32)
        if pixels.shape != (self.height, self.width, 3):
            raise InvalidInputError(
                f"pixel array {pixels.shape} does not match {self.width}x{self.height}"
            )
        if not np.all(np.isfinite(pixels)) or np.any(pixels < 0.0):
            raise InvalidInputError("framebuffer values must be finite and >= 0")
        object.__setattr__(self, "pixels", pixels)

    @classmethod
    def filled(cls, width: int, height: int, rgb) -> "Framebuffer":
        pixels = np.empty((height, width, 3), dtype=F32)
        pixels[...] = np.asarray(rgb, dtype=F32)
        return cls(width, height, pixels)


@dataclass(frozen=True, eq=False)
class RasterResult:
    framebuffer: Framebuffer
    transmittance: np.ndarray  # (H, W) final T per pixel
    weight_sum: np.ndarray  # (H, W) accumulated blend weights


def _composite(
    frame: SplatFrame,
    splats: np.ndarray,
    ix: np.ndarray,
    iy: np.ndarray,
    settings: RenderSettings,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Composite ``splats`` (indices in order) over pixels (ix, iy).

    Returns color (P, 3), transmittance (P,) and blend weight sum (P,).
    """
    count = len(ix)
    px = (ix.astype(F32) + F32(0.5))[None, :]
    py = (iy.astype(F32) + F32(0.5))[None, :]
    trans = np.ones(count, dtype=F32)
    color = np.zeros((count, 3), dtype=F32)
    weight = np.zeros(count, dtype=F32)
    floor = F32(settings.transmittance_floor)

    for start in range(0, len(splats), RASTER_CHUNK_SPLATS):
        chunk = splats[start : start + RASTER_CHUNK_SPLATS]
        mean = frame.mean_px[chunk]
        conic = frame.conic[chunk]
        rect = frame.rect[chunk]

        alpha = gaussian_alpha(
            px - mean[:, 0:1],
            py - mean[:, 1:2],
            conic[:, 0:1],
            conic[:, 1:2],
            conic[:, 2:3],
            frame.opacity[chunk][:, None],
            alpha_cutoff=settings.alpha_cutoff,
        )
        inside = (
            (ix[None, :] >= rect[:, 0:1])
            & (ix[None, :] <= rect[:, 1:2])
            & (iy[None, :] >= rect[:, 2:3])
            & (iy[None, :] <= rect[:, 3:4])
        )
        alpha = np.where(inside, alpha, F32(0.0))

        # Row k holds T before splat k; row K is T after the whole chunk
        running = np.multiply.accumulate(
            np.concatenate([trans[None, :], F32(1.0) - alpha], axis=0), axis=0
        )
        before = running[:-1]
        alive = before >= floor
        # T never increases, so the live splats of each pixel form a prefix
        live_count = np.count_nonzero(alive, axis=0)
        trans = np.take_along_axis(running, live_count[None, :], axis=0)[0]

        blend = np.where(alive, before * alpha, F32(0.0))
        color = np.add.accumulate(
            np.concatenate(
                [color[None, :, :], blend[:, :, None] * frame.color[chunk][:, None, :]],
                axis=0,
            ),
            axis=0,
        )[-1]
        weight = np.add.accumulate(
            np.concatenate([weight[None, :], blend], axis=0), axis=0
        )[-1]

        if not np.any(trans >= floor):
            break
    return color, trans, weight


def _tile_bins(frame: SplatFrame, tiles_x: int, tile_size: int):
    """Tile id per (tile, splat) pair, sorted by tile then compositing order"""
    rect = frame.rect.astype(np.int64)
    tx0, tx1 = rect[:, 0] // tile_size, rect[:, 1] // tile_size
    ty0, ty1 = rect[:, 2] // tile_size, rect[:, 3] // tile_size
    nx = np.maximum(tx1 - tx0 + 1, 0)
    ny = np.maximum(ty1 - ty0 + 1, 0)
    empty = (rect[:, 1] < rect[:, 0]) | (rect[:, 3] < rect[:, 2])
    nx[empty] = 0
    per_splat = nx * ny

    splat = np.repeat(np.arange(len(frame)), per_splat)
    offsets = np.repeat(np.cumsum(per_splat) - per_splat, per_splat)
    local = np.arange(len(splat)) - offsets
    width = np.repeat(np.maximum(nx, 1), per_splat)
    tile_x = np.repeat(tx0, per_splat) + local % width
    tile_y = np.repeat(ty0, per_splat) + local // width
    tile_id = tile_y * tiles_x + tile_x

    order = np.lexsort((splat, tile_id))
    return tile_id[order], splat[order]


def rasterize_with_stats(
    frame: SplatFrame, settings: RenderSettings, width: int, height: int
) -> RasterResult:
    """Tiled rasterization, also returning per-pixel final transmittance and weight"""
    if width < 1 or height < 1:
        raise InvalidInputError("framebuffer must be at least 1x1")
    if not frame.is_sorted:
        frame = sort_splats(frame)
    background = np.asarray(settings.background, dtype=F32)
    pixels = np.empty((height, width, 3), dtype=F32)
    pixels[...] = background
    trans_map = np.ones((height, width), dtype=F32)
    weight_map = np.zeros((height, width), dtype=F32)

    ts = settings.tile_size
    tiles_x = -(-width // ts)
    tile_ids, splat_ids = _tile_bins(frame, tiles_x, ts)
    occupied, starts = np.unique(tile_ids, return_index=True)
    ends = np.append(starts[1:], len(tile_ids))

    def work(job: int) -> None:
        tile = int(occupied[job])
        y0, x0 = (tile // tiles_x) * ts, (tile % tiles_x) * ts
        y1, x1 = min(y0 + ts, height), min(x0 + ts, width)
        ys, xs = np.mgrid[y0:y1, x0:x1]
        color, trans, weight = _composite(
            frame, splat_ids[starts[job] : ends[job]], xs.ravel(), ys.ravel(), settings
        )
        shape = (y1 - y0, x1 - x0)
        pixels[y0:y1, x0:x1] = (color + trans[:, None] * background).reshape(shape + (3,))
        trans_map[y0:y1, x0:x1] = trans.reshape(shape)
        weight_map[y0:y1, x0:x1] = weight.reshape(shape)

    threads = settings.threads
    if threads <= 1 or len(occupied) <= 1:
        for job in range(len(occupied)):
            work(job)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(len(occupied))))

    return RasterResult(Framebuffer(width, height, pixels), trans_map, weight_map)


def rasterize(
    frame: SplatFrame, settings: RenderSettings, width: int, height: int
) -> Framebuffer:
    return rasterize_with_stats(frame, settings, width, height).framebuffer


def rasterize_reference(
    frame: SplatFrame, settings: RenderSettings, width: int, height: int
) -> Framebuffer:
    """Naive loop: every pixel against every splat, no binning and no threads"""
    if not frame.is_sorted:
        frame = sort_splats(frame)
    background = np.asarray(settings.background, dtype=F32)
    ys, xs = np.mgrid[0:height, 0:width]
    ix, iy = xs.ravel(), ys.ravel()
    out: List[np.ndarray] = []
    everything = np.arange(len(frame))
    for start in range(0, len(ix), REFERENCE_PIXEL_BLOCK):
        block = slice(start, start + REFERENCE_PIXEL_BLOCK)
        color, trans, _ = _composite(frame, everything, ix[block], iy[block], settings)
        out.append(color + trans[:, None] * background)
    return Framebuffer(width, height, np.concatenate(out).reshape(height, width, 3))
