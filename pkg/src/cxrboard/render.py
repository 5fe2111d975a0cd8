"""Server-side crop rendering to displayable 8-bit PNG buffers.

Crops render on the server so clients on small displays never pull the
full-resolution original.  16-bit sources are window-scaled to 8 bits
using the min and max of the crop itself (a constant crop degenerates to
all-zero output, documented behavior rather than a divide-by-zero).
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from ._kernels import resample_bilinear
from .errors import SpecImageMismatch, ZeroViewport
from .geometry import Rect, image_rect
from .imaging import ImageRecord
from .viewport import ViewportSpec


def render_crop(
    image: ImageRecord, crop: Rect, out_w: int, out_h: int
) -> np.ndarray:
    """Resample a crop to (out_h, out_w) uint8, bilinear, half-up rounding."""
    if out_w <= 0 or out_h <= 0:
        raise ZeroViewport(f"output {out_w}x{out_h}")
    bounds = image_rect(image.width, image.height)
    if crop.is_empty or not bounds.contains_rect(crop):
        raise SpecImageMismatch(
            f"crop {crop.as_tuple()} invalid for {image.width}x{image.height} image"
        )
    source = image.pixels[crop.y0 : crop.y1, crop.x0 : crop.x1]
    interp = resample_bilinear(source, out_h, out_w)
    if image.bit_depth == 8:
        return np.clip(np.floor(interp + 0.5), 0, 255).astype(np.uint8)
    lo = float(source.min())
    hi = float(source.max())
    if hi == lo:
        return np.zeros((out_h, out_w), dtype=np.uint8)
    scaled = (interp - lo) * (255.0 / (hi - lo))
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


def render_spec(image: ImageRecord, spec: ViewportSpec, out_w: int, out_h: int) -> np.ndarray:
    return render_crop(image, spec.crop, out_w, out_h)


def encode_png(buffer: np.ndarray) -> bytes:
    """Encode an 8-bit grayscale buffer as PNG bytes."""
    out = io.BytesIO()
    Image.fromarray(buffer, mode="L").save(out, format="PNG")
    return out.getvalue()
