"""Ellipse link weights, spatial covariance prior, and the regularized image inverse.

The per-link breathing power vector v is modeled as W x plus noise, where x is
breathing energy per pixel. The one-time projection solves the regularized
least-squares inverse so each window costs a single matrix-vector multiply.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.spatial.distance import cdist

from .core import LinkKey, NodeGeometry
from .errors import ConfigurationError, DataError, SingularModelError


@dataclass(frozen=True)
class TomographyParams:
    """Imaging parameters: pixel size, prior variance/correlation, ellipse size."""

    pixel_width_m: float = 0.2
    pixel_variance: float = 2.0
    correlation_distance_m: float = 2.0
    ellipse_lambda_m: float = 1.0
    grid_pad_m: float = 0.5

    def __post_init__(self):
        for name in ("pixel_width_m", "pixel_variance", "correlation_distance_m", "ellipse_lambda_m"):
            if getattr(self, name) <= 0.0:
                raise ConfigurationError(f"{name} must be positive")
        if self.grid_pad_m < 0.0:
            raise ConfigurationError("grid_pad_m cannot be negative")


@dataclass(frozen=True, eq=False)
class PixelGrid:
    """Regular pixel lattice covering a rectangle, row-major from the lower-left.

    Pixel k has center ``centers[k]``; k = iy * nx + ix with ix along x.
    """

    x_min: float
    y_min: float
    nx: int
    ny: int
    pixel_width: float
    centers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ConfigurationError("grid must have at least one pixel per axis")
        if self.pixel_width <= 0.0:
            raise ConfigurationError("pixel width must be positive")
        xs = self.x_min + (np.arange(self.nx) + 0.5) * self.pixel_width
        ys = self.y_min + (np.arange(self.ny) + 0.5) * self.pixel_width
        cx, cy = np.meshgrid(xs, ys)
        object.__setattr__(self, "centers", np.column_stack([cx.ravel(), cy.ravel()]))

    @property
    def n_pixels(self) -> int:
        return self.nx * self.ny

    def image_matrix(self, x: np.ndarray) -> np.ndarray:
        """Reshape a pixel vector into (ny, nx) with rows along y."""
        return np.asarray(x).reshape(self.ny, self.nx)

    @classmethod
    def from_rect(cls, x_min, y_min, x_max, y_max, pixel_width: float) -> "PixelGrid":
        nx = max(1, int(np.ceil((x_max - x_min) / pixel_width - 1e-9)))
        ny = max(1, int(np.ceil((y_max - y_min) / pixel_width - 1e-9)))
        return cls(x_min=float(x_min), y_min=float(y_min), nx=nx, ny=ny, pixel_width=pixel_width)

    @classmethod
    def from_nodes(
        cls, nodes: Iterable[NodeGeometry], pixel_width: float = 0.2, pad: float = 0.5
    ) -> "PixelGrid":
        """Bounding box of the node positions, padded on every side."""
        pos = np.array([n.position for n in nodes])
        if pos.size == 0:
            raise ConfigurationError("no nodes given")
        return cls.from_rect(
            pos[:, 0].min() - pad,
            pos[:, 1].min() - pad,
            pos[:, 0].max() + pad,
            pos[:, 1].max() + pad,
            pixel_width,
        )


def _node_positions(nodes) -> dict[int, np.ndarray]:
    if isinstance(nodes, Mapping):
        return {int(k): np.asarray(v, dtype=np.float64) for k, v in nodes.items()}
    return {n.node_id: np.asarray(n.position, dtype=np.float64) for n in nodes}


def build_weights(
    nodes,
    links: Sequence[LinkKey],
    grid: PixelGrid,
    ellipse_lambda: float = 1.0,
) -> np.ndarray:
    """Ellipse indicator weight matrix W, one row per link.

    Pixel k weighs into link l when the sum of its distances to the link's
    endpoints is within the link length plus the ellipse size parameter; the
    row is normalized by its in-ellipse pixel count so each nonzero row sums
    to 1. Channels with the same endpoints share identical rows. A link whose
    ellipse misses the grid entirely gets an all-zero row and a warning.
    """
    if ellipse_lambda <= 0.0:
        raise ConfigurationError("ellipse size parameter must be positive")
    pos = _node_positions(nodes)
    for lk in links:
        if lk.tx not in pos or lk.rx not in pos:
            raise ConfigurationError(f"missing node coordinates for link {lk}")
    used = sorted({lk.tx for lk in links} | {lk.rx for lk in links})
    dists = {nid: np.linalg.norm(grid.centers - pos[nid], axis=1) for nid in used}
    w = np.zeros((len(links), grid.n_pixels))
    cache: dict[tuple[int, int], np.ndarray] = {}
    for j, lk in enumerate(links):
        key = (lk.tx, lk.rx) if lk.tx < lk.rx else (lk.rx, lk.tx)
        row = cache.get(key)
        if row is None:
            span = float(np.linalg.norm(pos[lk.tx] - pos[lk.rx])) + ellipse_lambda
            inside = (dists[lk.tx] + dists[lk.rx]) <= span
            count = int(inside.sum())
            if count == 0:
                warnings.warn(
                    f"link {key} has no pixels inside its ellipse; weight row is zero",
                    stacklevel=2,
                )
                row = np.zeros(grid.n_pixels)
            else:
                row = inside / count
            cache[key] = row
        w[j] = row
    return w


def build_covariance(
    grid: PixelGrid, pixel_variance: float = 2.0, correlation_distance: float = 2.0
) -> np.ndarray:
    """Exponentially decaying pixel covariance prior G.

    G[k, m] = pixel_variance * exp(-d(k, m) / correlation_distance); symmetric
    positive definite for distinct pixel centers.
    """
    if pixel_variance <= 0.0 or correlation_distance <= 0.0:
        raise ConfigurationError("covariance parameters must be positive")
    d = cdist(grid.centers, grid.centers)
    return pixel_variance * np.exp(-d / correlation_distance)


def build_projection(w: np.ndarray, g: np.ndarray, residual_tol: float = 1e-6) -> np.ndarray:
    """One-time projection solving (W^T W + G^{-1}) P = W^T.

    Factors the SPD system once and solves for all link columns instead of
    forming explicit inverses of the full system; applies one refinement pass
    if needed and fails loudly when the relative residual stays above
    ``residual_tol``.
    """
    w = np.asarray(w, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    rhs = w.T.copy()
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0.0:
        return np.zeros_like(rhs)
    try:
        cg = cho_factor(g, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise SingularModelError(f"covariance prior is not positive definite: {exc}") from exc
    g_inv = cho_solve(cg, np.eye(g.shape[0]), check_finite=False)
    g_inv = 0.5 * (g_inv + g_inv.T)
    a = w.T @ w + g_inv
    try:
        ca = cho_factor(a, lower=True, check_finite=False)
    except LinAlgError as exc:
        eigs = np.linalg.eigvalsh(a)
        raise SingularModelError(
            f"regularized system is numerically singular: {exc}; "
            f"eigenvalue range [{eigs.min():.3e}, {eigs.max():.3e}]"
        ) from exc
    proj = cho_solve(ca, rhs, check_finite=False)
    residual = a @ proj - rhs
    rel = np.linalg.norm(residual) / rhs_norm
    if rel > residual_tol:
        proj = proj - cho_solve(ca, residual, check_finite=False)
        rel = np.linalg.norm(a @ proj - rhs) / rhs_norm
        if rel > residual_tol:
            cond = np.linalg.cond(a)
            raise SingularModelError(
                f"projection residual {rel:.3e} exceeds {residual_tol:.1e} "
                f"(condition number {cond:.3e})"
            )
    return proj


@dataclass(frozen=True, eq=False)
class BreathingImage:
    """Pixel-wise breathing energy estimate with its argmax location."""

    x: np.ndarray
    argmax_index: int
    location: tuple[float, float]
    peak: float
    degenerate: bool = False


def estimate_image(projection: np.ndarray, grid: PixelGrid, v) -> BreathingImage:
    """Breathing image x = projection @ v and the center of its maximum pixel.

    Ties break toward the lowest pixel index. An identically zero image is
    flagged degenerate and located at pixel 0.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (projection.shape[1],):
        raise DataError(
            f"power vector length {v.shape} does not match {projection.shape[1]} model links"
        )
    if not np.isfinite(v).all() or (v < 0).any():
        raise DataError("power vector entries must be finite and nonnegative")
    x = projection @ v
    k = int(np.argmax(x))
    degenerate = not x.any()
    if degenerate:
        k = 0
    cx, cy = grid.centers[k]
    return BreathingImage(
        x=x, argmax_index=k, location=(float(cx), float(cy)), peak=float(x[k]), degenerate=degenerate
    )


@dataclass(frozen=True, eq=False)
class ImagingModel:
    """Immutable bundle of grid, link order, W, G, and the one-time projection."""

    grid: PixelGrid
    links: tuple[LinkKey, ...]
    weights: np.ndarray
    covariance: np.ndarray
    projection: np.ndarray
    params: TomographyParams

    @classmethod
    def build(
        cls,
        nodes,
        links: Sequence[LinkKey],
        params: TomographyParams = TomographyParams(),
        grid: PixelGrid | None = None,
    ) -> "ImagingModel":
        if grid is None:
            node_list = list(nodes.values()) if isinstance(nodes, Mapping) else list(nodes)
            if isinstance(nodes, Mapping):
                node_list = [NodeGeometry(int(k), tuple(v)) for k, v in nodes.items()]
            grid = PixelGrid.from_nodes(node_list, params.pixel_width_m, params.grid_pad_m)
        w = build_weights(nodes, links, grid, params.ellipse_lambda_m)
        g = build_covariance(grid, params.pixel_variance, params.correlation_distance_m)
        proj = build_projection(w, g)
        return cls(
            grid=grid,
            links=tuple(links),
            weights=w,
            covariance=g,
            projection=proj,
            params=params,
        )

    def estimate_image(self, v) -> BreathingImage:
        return estimate_image(self.projection, self.grid, v)
