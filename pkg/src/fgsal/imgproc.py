"""Image ingestion, sRGB to CIELAB conversion and normed gradients.

Images are plain numpy arrays in row-major ``(height, width, channels)``
layout. RGB images are ``uint8``; Lab images and gradient maps are
``float64``.
"""
import os

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageFormatError, ImageReadError

MIN_SIDE = 8

# D65 reference white, Y normalized to 1
D65_WHITE = np.array([0.95047, 1.0, 1.08883])

# linear sRGB -> XYZ (IEC 61966-2-1)
SRGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])

BT601_LUMA = np.array([0.299, 0.587, 0.114])


def check_rgb(img):
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ImageFormatError(f"expected an (H, W, 3) RGB array, got shape {img.shape}")
    h, w = img.shape[:2]
    if h < MIN_SIDE or w < MIN_SIDE:
        raise ImageFormatError(f"image is {w}x{h}; both sides must be at least {MIN_SIDE}")
    return img


def load_image(path):
    """Decode a raster file into an ``(H, W, 3)`` uint8 RGB array.

    Grayscale, palette and alpha images are converted to plain RGB.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise ImageReadError(f"no such image file: {path}")
    try:
        with Image.open(path) as im:
            rgb = np.array(im.convert("RGB"))
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"cannot decode {path}: {exc}") from exc
    except OSError as exc:
        raise ImageReadError(f"cannot read {path}: {exc}") from exc
    return check_rgb(rgb)


def rgb_to_lab(img):
    """Convert 8-bit sRGB to CIELAB under the D65 white point.

    Parameters
    ----------
    img : ndarray, shape (..., 3)
        sRGB values in ``[0, 255]``.

    Returns
    -------
    ndarray, shape (..., 3)
        ``L`` in ``[0, 100]`` followed by ``a`` and ``b``.
    """
    c = np.asarray(img, dtype=np.float64) / 255.0
    linear = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = linear @ SRGB_TO_XYZ.T / D65_WHITE

    delta = 6.0 / 29.0
    f = np.where(xyz > delta ** 3, np.cbrt(xyz), xyz / (3 * delta ** 2) + 4.0 / 29.0)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    # black maps to L = 0 exactly, guard against -0.0 / tiny negatives
    lab[..., 0] = np.clip(lab[..., 0], 0.0, 100.0)
    return lab


def to_gray(img):
    return np.asarray(img, dtype=np.float64) @ BT601_LUMA


def normed_gradient(img):
    """Per-pixel ``min(|gx| + |gy|, 255)`` on the BT.601 luma image.

    ``gx`` and ``gy`` are central differences ``(I[k+1] - I[k-1]) / 2`` with
    replicated borders.
    """
    gray = to_gray(check_rgb(img))
    padded = np.pad(gray, 1, mode="edge")
    gx = (padded[1:-1, 2:] - padded[1:-1, :-2]) / 2.0
    gy = (padded[2:, 1:-1] - padded[:-2, 1:-1]) / 2.0
    return np.minimum(np.abs(gx) + np.abs(gy), 255.0)
