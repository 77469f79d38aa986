"""Credible regions for latent positions, overlap graphs, subgroup clustering.

Regions are highest-density sets of a bivariate Gaussian kernel density
estimate (Scott's-rule bandwidth per axis, 128x128 grid padded three
bandwidths beyond the draw bounding box).  The density threshold is chosen
from draw counts: the largest value whose super-level cells contain at
least the requested fraction of the draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.cluster import KMeans

from .core import ConfigurationError
from .draws import PosteriorDraws

GRID_SIZE = 128
PAD_BANDWIDTHS = 3.0
MIN_DRAWS = 500


@dataclass
class CredibleRegion:
    """Highest-density region of one actor's position posterior at one time."""

    actor: int
    time: int
    level: float
    bounds: tuple[float, float, float, float]   # (x_lo, x_hi, y_lo, y_hi)
    density: np.ndarray                         # (G, G), x index first
    threshold: float
    member: np.ndarray                          # (G, G) bool
    bandwidth: tuple[float, float]
    n_draws: int
    degenerate: bool = False

    @property
    def cell_area(self) -> float:
        x_lo, x_hi, y_lo, y_hi = self.bounds
        G = self.density.shape[0]
        return ((x_hi - x_lo) / G) * ((y_hi - y_lo) / G)

    @property
    def area(self) -> float:
        return float(self.member.sum()) * self.cell_area

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Membership of (m, 2) points, by cell lookup (False outside the grid)."""
        ix, iy, inside = _cell_indices(points, self.bounds, self.density.shape[0])
        out = np.zeros(points.shape[0], dtype=bool)
        out[inside] = self.member[ix[inside], iy[inside]]
        return out


def _cell_indices(points: np.ndarray, bounds, G: int):
    x_lo, x_hi, y_lo, y_hi = bounds
    wx = (x_hi - x_lo) / G
    wy = (y_hi - y_lo) / G
    ix = np.floor((points[:, 0] - x_lo) / wx).astype(np.int64)
    iy = np.floor((points[:, 1] - y_lo) / wy).astype(np.int64)
    inside = (ix >= 0) & (ix < G) & (iy >= 0) & (iy < G)
    ix = np.clip(ix, 0, G - 1)
    iy = np.clip(iy, 0, G - 1)
    return ix, iy, inside


def _scott_bandwidths(points: np.ndarray) -> tuple[float, float]:
    S = points.shape[0]
    factor = S ** (-1.0 / 6.0)  # Scott's rule for two dimensions
    return (float(np.std(points[:, 0]) * factor),
            float(np.std(points[:, 1]) * factor))


def credible_region(points: np.ndarray, actor: int = 0, time: int = 0,
                    level: float = 0.95,
                    bounds: tuple[float, float, float, float] | None = None,
                    grid_size: int = GRID_SIZE,
                    min_draws: int = MIN_DRAWS) -> CredibleRegion:
    """Highest-density region from posterior position draws.

    Parameters
    ----------
    points : (S, 2) array of posterior draws for one actor at one time.
    bounds : optional common grid frame; defaults to the draw bounding box
        padded three bandwidths per axis.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ConfigurationError(f"regions are planar: draws must be (S, 2), got {points.shape}")
    S = points.shape[0]
    if S < min_draws:
        raise ConfigurationError(f"need at least {min_draws} draws, got {S}")
    if not 0.0 < level < 1.0:
        raise ConfigurationError(f"level must lie in (0, 1), got {level}")

    bx, by = _scott_bandwidths(points)
    degenerate = bx <= 0.0 or by <= 0.0
    if bounds is None:
        # Point-mass clouds get a tiny positive pad so the grid stays valid.
        pad_x = max(PAD_BANDWIDTHS * bx, 1e-8 * max(1.0, float(np.abs(points).max())))
        pad_y = max(PAD_BANDWIDTHS * by, 1e-8 * max(1.0, float(np.abs(points).max())))
        bounds = (points[:, 0].min() - pad_x, points[:, 0].max() + pad_x,
                  points[:, 1].min() - pad_y, points[:, 1].max() + pad_y)

    x_lo, x_hi, y_lo, y_hi = bounds
    G = grid_size
    xc = x_lo + (np.arange(G) + 0.5) * (x_hi - x_lo) / G
    yc = y_lo + (np.arange(G) + 0.5) * (y_hi - y_lo) / G

    if degenerate:
        # Zero-variance axis: a kernel density is undefined, so rasterize
        # the draw counts directly (point-mass region).
        density = np.zeros((G, G))
        ix, iy, inside = _cell_indices(points, bounds, G)
        np.add.at(density, (ix[inside], iy[inside]), 1.0)
        density /= S * max(1e-300, ((x_hi - x_lo) / G) * ((y_hi - y_lo) / G))
    else:
        # Separable product kernel evaluated by two (S, G) factors.
        ax = np.exp(-0.5 * ((xc[None, :] - points[:, 0][:, None]) / bx) ** 2)
        ay = np.exp(-0.5 * ((yc[None, :] - points[:, 1][:, None]) / by) ** 2)
        density = (ax.T @ ay) / (S * 2.0 * np.pi * bx * by)

    ix, iy, inside = _cell_indices(points, bounds, G)
    cell_counts = np.zeros((G, G), dtype=np.int64)
    np.add.at(cell_counts, (ix[inside], iy[inside]), 1)

    flat_density = density.ravel()
    flat_counts = cell_counts.ravel()
    order = np.argsort(flat_density)[::-1]
    cum = np.cumsum(flat_counts[order])
    needed = int(np.ceil(level * S))
    cut = int(np.searchsorted(cum, needed))
    if cut >= order.size:
        cut = order.size - 1
    threshold = float(flat_density[order[cut]])
    member = density >= threshold

    return CredibleRegion(
        actor=actor, time=time, level=level, bounds=bounds, density=density,
        threshold=threshold, member=member, bandwidth=(bx, by), n_draws=S,
        degenerate=degenerate,
    )


def regions_at_time(draws: PosteriorDraws, t: int, level: float = 0.95,
                    grid_size: int = GRID_SIZE,
                    min_draws: int = MIN_DRAWS) -> list[CredibleRegion]:
    """Regions for every actor at time t on one shared grid frame."""
    if draws.p != 2:
        raise ConfigurationError("credible regions need a two-dimensional latent space")
    points = draws.X[:, t, :, :]  # (S, n, 2)
    n = draws.n
    lows = np.full(2, np.inf)
    highs = np.full(2, -np.inf)
    for i in range(n):
        bx, by = _scott_bandwidths(points[:, i, :])
        pad = np.array([PAD_BANDWIDTHS * bx, PAD_BANDWIDTHS * by])
        lows = np.minimum(lows, points[:, i, :].min(axis=0) - pad)
        highs = np.maximum(highs, points[:, i, :].max(axis=0) + pad)
    bounds = (float(lows[0]), float(highs[0]), float(lows[1]), float(highs[1]))
    return [
        credible_region(points[:, i, :], actor=i, time=t, level=level,
                        bounds=bounds, grid_size=grid_size, min_draws=min_draws)
        for i in range(n)
    ]


def overlap_graph(regions: list[CredibleRegion]) -> np.ndarray:
    """Binary symmetric matrix marking region intersections; unit diagonal.

    All regions must share one grid frame (as produced by
    :func:`regions_at_time`).
    """
    if not regions:
        raise ConfigurationError("no regions given")
    frame = regions[0].bounds
    shape = regions[0].member.shape
    for reg in regions:
        if reg.bounds != frame or reg.member.shape != shape:
            raise ConfigurationError("regions are not on a common grid frame")
    n = len(regions)
    graph = np.eye(n, dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            hit = int(np.any(regions[i].member & regions[j].member))
            graph[i, j] = hit
            graph[j, i] = hit
    return graph


def cluster_subgroups(graph: np.ndarray, k: int, seed: int = 0,
                      restarts: int = 50) -> np.ndarray:
    """k-means partition of actors by their overlap profiles (matrix rows)."""
    graph = np.asarray(graph, dtype=np.float64)
    n = graph.shape[0]
    if k < 2:
        raise ConfigurationError(f"k must be at least 2, got {k}")
    if k > n:
        raise ConfigurationError(f"k={k} exceeds the number of actors {n}")
    km = KMeans(n_clusters=k, n_init=restarts, random_state=seed)
    return km.fit_predict(graph)
