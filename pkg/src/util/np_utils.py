import math

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_angle(angle: float) -> float:
    """
    Map an angle to (-pi, pi].
    """
    r = math.remainder(angle, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def wrap_2pi(angle: float) -> float:
    """
    Map an angle to [0, 2pi).
    """
    r = math.fmod(angle, TWO_PI)
    if r < 0:
        r += TWO_PI
    if r >= TWO_PI:
        r = 0.0
    return r


def angular_distance(a: float, b: float) -> float:
    """
    returns the length of the shorter arc between two directions, in [0, pi]
    """
    return abs(normalize_angle(a - b))


def complex_grid(window, width: int, height: int) -> np.ndarray:
    """
    Pixel centres of a width x height raster over (re_min, re_max, im_min, im_max), row 0 at the top.
    """
    re_min, re_max, im_min, im_max = window
    dx = (re_max - re_min) / width
    dy = (im_max - im_min) / height
    re = re_min + (np.arange(width) + 0.5) * dx
    im = im_max - (np.arange(height) + 0.5) * dy
    return re[np.newaxis, :] + 1j * im[:, np.newaxis]
