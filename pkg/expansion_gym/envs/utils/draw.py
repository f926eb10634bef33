from typing import Union

import numpy as np
from PIL import Image, ImageDraw


def get_canvas_size(size: Union[int, list, tuple]):
    """Width and height of the canvas from an int (square) or a (height, width) pair."""
    if isinstance(size, int):
        return size, size
    if isinstance(size, (tuple, list)) and len(size) == 2:
        height, width = size
        return width, height
    raise TypeError("`size` must be integer, tuple or list with length two.")


def project(coordinates, size, margin=20):
    """
    Equirectangular placement of (lat, lon) rows on the canvas: longitude grows to the right, latitude up.
    A degenerate extent (all sites on one line) is centred.
    """
    width, height = get_canvas_size(size)
    coordinates = np.asarray(coordinates, dtype=float)
    lat, lon = coordinates[:, 0], coordinates[:, 1]
    x = _rescale(lon, margin, width - margin)
    y = _rescale(lat, height - margin, margin)
    return np.column_stack([x, y])


def _rescale(values, start, end):
    low, high = values.min(), values.max()
    if high == low:
        return np.full(len(values), (start + end) / 2)
    return start + (values - low) / (high - low) * (end - start)


def draw_canvas(size, fill='white'):
    width, height = get_canvas_size(size)
    return Image.new(mode='RGB', size=(width, height), color=fill)


def draw_square(image, center, half_side=4, fill='yellow', outline='black'):
    x, y = center
    ImageDraw.Draw(image).rectangle([(x - half_side, y - half_side), (x + half_side, y + half_side)], fill=fill,
                                    outline=outline)


def draw_circle(image, center, radius=4, fill=None, outline='black'):
    x, y = center
    ImageDraw.Draw(image).ellipse([(x - radius, y - radius), (x + radius, y + radius)], outline=outline, fill=fill)


def draw_score_board(image, text, board_height=30):
    im_width, im_height = image.size
    new_im = Image.new("RGB", size=(im_width, im_height + board_height), color='#e1e4e8')
    new_im.paste(image, (0, board_height))
    ImageDraw.Draw(new_im).text((10, board_height // 3), text=text, fill='black')
    return new_im


def scale_radii(values, min_radius, max_radius):
    """Linear radius scale between the smallest and largest value; missing values get the floor."""
    values = np.asarray(values, dtype=float)
    radii = np.full(len(values), float(min_radius))
    known = ~np.isnan(values)
    if known.any():
        low, high = values[known].min(), values[known].max()
        if high > low:
            radii[known] = min_radius + (values[known] - low) / (high - low) * (max_radius - min_radius)
        else:
            radii[known] = (min_radius + max_radius) / 2
    return radii
