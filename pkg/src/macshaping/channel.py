"""Gaussian likelihood and output-plane quadrature grids for Y = X_A + X_B + Z."""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .constellation import InvalidArgument, XorClassIndex

DEFAULT_SPACING = 0.125
DEFAULT_EXTENT = 10.0


@dataclass(frozen=True)
class ChannelSpec:
    """Noise variance per real dimension (sigma^2 = N_0 / 2)."""
    sigma2: float

    def __post_init__(self):
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise InvalidArgument(f"sigma2 must be positive and finite, got {self.sigma2}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @classmethod
    def from_snr_db(cls, snr_db: float, power: float, dims: int = 1) -> "ChannelSpec":
        """Noise level at which ``power / (dims * sigma2)`` equals ``snr_db``."""
        return cls(power / (dims * db_to_linear(snr_db)))

    def snr(self, power: float, dims: int = 1) -> float:
        return power / (dims * self.sigma2)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def likelihood(y, x_ab, ch: ChannelSpec):
    """Circularly-symmetric complex Gaussian density with per-dimension variance sigma^2."""
    d2 = np.abs(np.asarray(y) - np.asarray(x_ab)) ** 2
    return np.exp(-d2 / (2 * ch.sigma2)) / (2 * np.pi * ch.sigma2)


def normal_pdf(x, sigma2: float):
    return np.exp(-np.square(x) / (2 * sigma2)) / math.sqrt(2 * math.pi * sigma2)


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform tensor grid with trapezoid weights over a box in the output plane."""
    re_nodes: np.ndarray
    im_nodes: np.ndarray
    re_weights: np.ndarray
    im_weights: np.ndarray
    step: float
    sigma: float
    spacing: float  # in units of sigma
    extent: float   # in units of sigma

    @property
    def box(self) -> tuple[float, float, float, float]:
        return (self.re_nodes[0], self.re_nodes[-1], self.im_nodes[0], self.im_nodes[-1])

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.re_nodes), len(self.im_nodes))

    @property
    def nodes(self) -> np.ndarray:
        """All nodes as complex numbers, shape (n_re, n_im)."""
        return self.re_nodes[:, None] + 1j * self.im_nodes[None, :]

    @property
    def weights(self) -> np.ndarray:
        return np.outer(self.re_weights, self.im_weights)

    def covers(self, x_ab, ch: ChannelSpec, margin: float = 8.0) -> bool:
        lo_re, hi_re, lo_im, hi_im = self.box
        s = ch.sigma * margin
        x = np.asarray(x_ab)
        return bool(
            lo_re <= x.real.min() - s and hi_re >= x.real.max() + s
            and lo_im <= x.imag.min() - s and hi_im >= x.imag.max() + s
        )

    def active(self, x_ab, radius: float) -> tuple[np.ndarray, np.ndarray]:
        """Masks of nodes lying within ``radius`` of some coordinate, per axis.

        The density of every component is below exp(-radius^2 / 2 sigma^2)
        off these windows, so the rest of the box can be skipped.
        """
        x = np.asarray(x_ab)
        return (_window_mask(self.re_nodes, np.unique(x.real), radius),
                _window_mask(self.im_nodes, np.unique(x.imag), radius))

    def params(self) -> dict:
        return {"spacing": self.spacing, "extent": self.extent}


def _window_mask(nodes, centers, radius):
    idx = np.searchsorted(centers, nodes)
    left = np.abs(nodes - centers[np.clip(idx - 1, 0, len(centers) - 1)])
    right = np.abs(nodes - centers[np.clip(idx, 0, len(centers) - 1)])
    return np.minimum(left, right) <= radius * (1 + 1e-12)


def _axis(lo: float, hi: float, h: float):
    n = int(math.ceil((hi - lo) / h - 1e-9))
    nodes = lo + h * np.arange(n + 1)
    w = np.full(n + 1, h)
    w[0] = w[-1] = h / 2
    return nodes, w


def build_grid(classes: XorClassIndex | np.ndarray, ch: ChannelSpec,
               spacing_in_sigma: float = DEFAULT_SPACING,
               extent_in_sigma: float = DEFAULT_EXTENT) -> QuadratureGrid:
    if not 0 < spacing_in_sigma <= 0.25:
        raise InvalidArgument(f"spacing must lie in (0, 1/4] sigma, got {spacing_in_sigma}")
    if not extent_in_sigma >= 8:
        raise InvalidArgument(f"extent must be at least 8 sigma, got {extent_in_sigma}")
    x = classes.x_ab if isinstance(classes, XorClassIndex) else np.asarray(classes)
    s = ch.sigma
    h = spacing_in_sigma * s
    L = extent_in_sigma * s
    re_nodes, re_w = _axis(x.real.min() - L, x.real.max() + L, h)
    im_nodes, im_w = _axis(x.imag.min() - L, x.imag.max() + L, h)
    return QuadratureGrid(re_nodes, im_nodes, re_w, im_w, h, s,
                          float(spacing_in_sigma), float(extent_in_sigma))
