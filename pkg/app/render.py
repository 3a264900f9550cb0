"""Rasterize d=2 snapshots as binary pixmaps coloured by absorption order."""
import io
import logging
import os
from typing import Sequence

import numpy as np
from matplotlib import colormaps
from PIL import Image

from app.core.errors import ConfigError, DimensionError
from app.snapshots import Snapshot

logger = logging.getLogger(__name__)

BACKGROUND = (255, 255, 255)


def render_snapshot(snapshot: Snapshot, colormap: str = "viridis") -> Image.Image:
    if snapshot.dimension != 2:
        raise DimensionError(f"only d=2 snapshots can be rendered, got d={snapshot.dimension}")
    return render_vertices(snapshot.vertices(), colormap)


def render_vertices(vertices: Sequence[Sequence[int]], colormap: str = "viridis") -> Image.Image:
    """One pixel per lattice site of the bounding box, +y up; empty sites are white.

    ``vertices`` are in absorption order; colour is the absorption-order quantile.
    """
    try:
        cmap = colormaps[colormap]
    except KeyError:
        raise ConfigError(f"unknown colormap '{colormap}'")
    vertices = np.array(vertices, dtype=np.int64)
    if vertices.ndim != 2 or vertices.shape[1] != 2:
        raise DimensionError("only d=2 clusters can be rendered")
    lower = vertices.min(axis=0)
    upper = vertices.max(axis=0)
    width, height = (upper - lower + 1).tolist()
    pixels = np.empty((height, width, 3), dtype=np.uint8)
    pixels[:] = BACKGROUND
    quantile = np.arange(len(vertices)) / max(1, len(vertices) - 1)
    colours = (np.asarray(cmap(quantile))[:, :3] * 255.0).round().astype(np.uint8)
    pixels[upper[1] - vertices[:, 1], vertices[:, 0] - lower[0]] = colours
    return Image.fromarray(pixels)


def pixmap_bytes(image: Image.Image) -> bytes:
    buffer = io.BytesIO()
    image.save(buffer, format="PPM")
    return buffer.getvalue()


def write_pixmap(path: str, snapshot: Snapshot, colormap: str = "viridis") -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as f:
        f.write(pixmap_bytes(render_snapshot(snapshot, colormap)))
    logger.debug("wrote %s", path)
    return path
