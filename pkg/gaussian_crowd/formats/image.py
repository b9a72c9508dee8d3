from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image

from gaussian_crowd.constants import PPM_MAX_VALUE
from gaussian_crowd.errors import AssetError, InvalidInputError
from gaussian_crowd.renderer.rasterizer import Framebuffer
from gaussian_crowd.types import ImageFormat


def linear_to_srgb(linear: np.ndarray) -> np.ndarray:
    """Standard sRGB transfer of values clamped to [0, 1], in float64"""
    x = np.clip(np.asarray(linear, dtype=np.float64), 0.0, 1.0)
    return np.where(x <= 0.0031308, 12.92 * x, 1.055 * np.power(x, 1.0 / 2.4) - 0.055)


def to_srgb8(framebuffer: Framebuffer) -> np.ndarray:
    """(H, W, 3) uint8, rounding half away from zero"""
    encoded = linear_to_srgb(framebuffer.pixels)
    return np.floor(encoded * PPM_MAX_VALUE + 0.5).astype(np.uint8)


def ppm_bytes(framebuffer: Framebuffer) -> bytes:
    header = f"P6\n{framebuffer.width} {framebuffer.height}\n{PPM_MAX_VALUE}\n".encode("ascii")
    return header + to_srgb8(framebuffer).tobytes()


def image_format_for(path: Path) -> ImageFormat:
    suffix = path.suffix.lower().lstrip(".")
    try:
        return ImageFormat(suffix)
    except ValueError as e:
        raise InvalidInputError(f"cannot infer image format from '{path.name}' (use .ppm or .png)") from e


def write_image(
    framebuffer: Framebuffer,
    path: Union[str, Path],
    image_format: Optional[ImageFormat] = None,
) -> Path:
    """Write an 8-bit sRGB image; the format defaults to the path's suffix"""
    path = Path(path)
    image_format = ImageFormat(image_format) if image_format else image_format_for(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if image_format == ImageFormat.PPM:
            path.write_bytes(ppm_bytes(framebuffer))
        else:
            Image.fromarray(to_srgb8(framebuffer)).save(path, format="PNG")
    except OSError as e:
        raise AssetError(f"cannot write image {path}: {e}") from e
    return path


def read_image(path: Union[str, Path]) -> np.ndarray:
    """8-bit RGB pixels of a PPM or PNG file"""
    try:
        with Image.open(path) as image:
            return np.asarray(image.convert("RGB"))
    except OSError as e:
        raise AssetError(f"cannot read image {path}: {e}") from e
