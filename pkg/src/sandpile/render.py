"""Raster output: the published palette, PPM/PNG writers, frame indexes.

Counts map to colors as 0 white, 1 green, 2 blue, 3 black; cells outside the
domain are gray. The palette colors only carry names in the source figure,
so the green and blue RGB values here are fixed documented constants. A
scale-1 PPM render with this palette is losslessly invertible back to the
configuration.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .domain import Configuration, Domain

GREEN = (0, 170, 0)
BLUE = (0, 0, 200)


@dataclass(frozen=True)
class Palette:
    symbol_colors: tuple = ((255, 255, 255), GREEN, BLUE, (0, 0, 0))
    out_of_domain: tuple = (128, 128, 128)
    unstable: tuple = (220, 0, 0)


DEFAULT_PALETTE = Palette()


def render(config, palette=DEFAULT_PALETTE, scale=1, allow_unstable=False):
    """RGB image (uint8, top row first); each vertex a scale x scale block."""
    if scale < 1:
        raise ValueError("scale must be >= 1")
    if not allow_unstable and not config.is_stable():
        raise ValueError("refusing to render an unstable configuration "
                         "(pass allow_unstable=True to map >=4 to red)")
    d = config.domain
    lut = np.array(list(palette.symbol_colors) + [palette.unstable], np.uint8)
    symbols = np.minimum(config.grid, 4)
    img = lut[symbols]
    img[~d.mask] = palette.out_of_domain
    img = img[::-1]  # top row first
    if scale > 1:
        img = np.repeat(np.repeat(img, scale, axis=0), scale, axis=1)
    return img


def write_ppm(path, img):
    img = np.ascontiguousarray(img, np.uint8)
    h, w, _ = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(img.tobytes())


def read_ppm(path):
    with open(path, "rb") as fh:
        if fh.readline().strip() != b"P6":
            raise ValueError(f"{path}: not a binary PPM")
        line = fh.readline()
        while line.startswith(b"#"):
            line = fh.readline()
        w, h = map(int, line.split())
        maxval = int(fh.readline())
        if maxval != 255:
            raise ValueError("only maxval 255 PPMs are supported")
        data = np.frombuffer(fh.read(w * h * 3), np.uint8)
    return data.reshape(h, w, 3)


def write_png(path, img):
    from PIL import Image
    Image.fromarray(np.ascontiguousarray(img, np.uint8), "RGB").save(
        path, format="PNG", optimize=False)


def config_from_image(img, palette=DEFAULT_PALETTE):
    """Invert a scale-1 render back into a configuration (mask from gray)."""
    img = np.asarray(img, np.uint8)[::-1]  # back to bottom-up rows
    h, w, _ = img.shape
    grid = np.zeros((h, w), np.int64)
    mask = np.ones((h, w), bool)
    colors = {tuple(c): s for s, c in enumerate(palette.symbol_colors)}
    for r in range(h):
        for c in range(w):
            px = tuple(int(v) for v in img[r, c])
            if px == tuple(palette.out_of_domain):
                mask[r, c] = False
            elif px in colors:
                grid[r, c] = colors[px]
            else:
                raise ValueError(f"pixel {px} at {(r, c)} not in the palette")
    return Configuration(Domain(mask), grid)


def save_frame(path, config, palette=DEFAULT_PALETTE, scale=1,
               allow_unstable=False):
    img = render(config, palette, scale, allow_unstable)
    path = str(path)
    if path.endswith(".ppm"):
        write_ppm(path, img)
    elif path.endswith(".png"):
        write_png(path, img)
    else:
        raise ValueError("frame paths must end in .ppm or .png")
    return path


def write_frames_csv(path, rows):
    """Index file: (frame, time, path) per row."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "time", "path"])
        for k, (time, frame_path) in enumerate(rows):
            writer.writerow([k, str(time), frame_path])
