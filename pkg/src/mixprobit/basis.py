"""Low-rank thin-plate spline designs for binary regression.

The construction has four steps: covariates are mapped affinely onto the
unit cube, knots are placed at the centers of gravity of the occupied
epsilon-width cells, a radial basis matrix is evaluated between points and
knots, and an SVD truncation turns that matrix into a design with
orthogonal columns.  The right singular vectors are kept so new points can
be expanded into the same column space without ever forming an n-by-n
kernel matrix.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DataError, NumericalError

__all__ = [
    "Dataset",
    "BasisExpansion",
    "normalize_covariates",
    "normalize_points",
    "select_knots",
    "tps_exponent",
    "rbf_matrix",
    "truncate_svd",
    "build_expansion",
    "basis_row",
    "basis_rows",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    """Binary regression data plus the per-column bounds used for scaling.

    Attributes
    ----------
    covariates : ndarray, shape (n, p)
        Raw covariates, finite, at least one column.
    responses : ndarray, shape (n,)
        Binary outcomes in {0, 1}.
    column_min, column_max : ndarray, shape (p,)
        Bounds defining the affine map onto the unit cube; strict
        inequality per column (constant columns are rejected).
    """

    covariates: np.ndarray
    responses: np.ndarray
    column_min: np.ndarray
    column_max: np.ndarray

    @classmethod
    def from_arrays(cls, covariates, responses):
        """Validate raw arrays and derive the scaling bounds from the data."""
        x = np.asarray(covariates, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise DataError("covariates must form a nonempty 2-d array")
        if not np.all(np.isfinite(x)):
            bad = int(np.nonzero(~np.isfinite(x).all(axis=1))[0][0])
            raise DataError(f"non-finite covariate value at row {bad}")
        w = np.asarray(responses)
        if w.ndim != 1 or w.shape[0] != x.shape[0]:
            raise DataError("responses must be a vector matching the covariate rows")
        if not np.all(np.isin(w, (0, 1))):
            bad = int(np.nonzero(~np.isin(w, (0, 1)))[0][0])
            raise DataError(f"response at row {bad} is not 0 or 1")
        lo = x.min(axis=0)
        hi = x.max(axis=0)
        flat = np.nonzero(hi <= lo)[0]
        if flat.size:
            raise DataError(f"covariate column {int(flat[0])} is constant and cannot be scaled")
        return cls(x, w.astype(np.int64), lo, hi)

    def with_responses(self, responses):
        """Same covariates and bounds, new response vector."""
        w = np.asarray(responses)
        if w.shape != self.responses.shape or not np.all(np.isin(w, (0, 1))):
            raise DataError("replacement responses must be a matching 0/1 vector")
        return replace(self, responses=w.astype(np.int64))

    @property
    def n(self):
        return self.covariates.shape[0]

    @property
    def p(self):
        return self.covariates.shape[1]


@dataclass(frozen=True)
class BasisExpansion:
    """Fitted basis: knots, scaling bounds and the truncated SVD factors.

    ``design`` holds the training design U * diag(s) with orthogonal
    columns; it is None when an expansion is restored from an archive,
    where only out-of-sample expansion is needed.  ``right_factor`` (m x l)
    projects a radial basis row onto the retained column space.
    """

    knots: np.ndarray
    exponent: int
    column_min: np.ndarray
    column_max: np.ndarray
    epsilon: float
    design: np.ndarray | None
    right_factor: np.ndarray
    singular_values: np.ndarray
    energy_ratio: float

    @property
    def rank(self):
        return self.right_factor.shape[1]

    @property
    def p(self):
        return self.knots.shape[1]


def normalize_covariates(dataset):
    """Map the dataset's covariates onto [0, 1] per column.

    Returns an (n, p) array; every column attains both 0 and 1 because the
    bounds come from the data itself.
    """
    return normalize_points(dataset.covariates, dataset.column_min, dataset.column_max)


def normalize_points(points, column_min, column_max):
    """Apply the stored affine map to arbitrary points (no clipping)."""
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[1] != column_min.shape[0]:
        raise DataError(
            f"points have {x.shape[1]} columns, expected {column_min.shape[0]}")
    span = column_max - column_min
    if np.any(span <= 0):
        raise DataError("degenerate column bounds: max must exceed min")
    return (x - column_min) / span


def select_knots(points, epsilon):
    """Center-of-gravity knots over the occupied epsilon-width cells.

    Parameters
    ----------
    points : ndarray, shape (n, p)
        Points already scaled to the unit cube.
    epsilon : float
        Cell width in (0, 1]; cells are half-open and the last cell along
        each axis is closed so 1.0 belongs to it.

    Returns
    -------
    ndarray, shape (m, p)
        One knot per nonempty cell, ordered by lexicographic cell index.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if not 0.0 < epsilon <= 1.0:
        raise DataError("epsilon must lie in (0, 1]")
    n_cells = max(1, int(math.ceil((1.0 - 1e-9) / epsilon)))
    cells = np.clip(np.floor(pts / epsilon).astype(np.int64), 0, n_cells - 1)
    uniq, inverse = np.unique(cells, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    m = uniq.shape[0]
    knots = np.zeros((m, pts.shape[1]))
    np.add.at(knots, inverse, pts)
    counts = np.bincount(inverse, minlength=m).astype(float)
    return knots / counts[:, None]


def tps_exponent(p):
    """Radial power 2 * ceil(p/2 + 0.1) - p for dimension p (always odd+p even)."""
    if p < 1:
        raise DataError("dimension must be at least 1")
    return int(2 * math.ceil(p / 2.0 + 0.1) - p)


def rbf_matrix(points, knots, exponent):
    """Radial basis matrix phi[i, j] = d^a * log d with d = ||x_i - k_j||.

    Entries at zero distance are zero (the d^a log d limit).
    """
    x = np.asarray(points, dtype=float)
    k = np.asarray(knots, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if k.ndim == 1:
        k = k[:, None]
    d = cdist(x, k)
    out = np.zeros_like(d)
    mask = d > 0
    dm = d[mask]
    out[mask] = dm ** exponent * np.log(dm)
    return out


def truncate_svd(phi, l_max):
    """Truncate the SVD of the radial basis matrix.

    Returns ``(design, right_factor, singular_values, energy_ratio)`` where
    ``design = U_l diag(s_l)`` has orthogonal columns, ``right_factor`` is
    V_l, and ``energy_ratio`` is the squared singular-value mass the cut
    discards.  The retained count is min(l_max, numerical rank).
    """
    phi = np.asarray(phi, dtype=float)
    try:
        u, s, vt = np.linalg.svd(phi, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            "SVD of the basis matrix did not converge "
            f"(shape {phi.shape}, fro norm {np.linalg.norm(phi):.3e})") from exc
    if s.size == 0 or s[0] <= 0:
        raise NumericalError("basis matrix has no positive singular values")
    rank = int(np.count_nonzero(s > s[0] * max(phi.shape) * np.finfo(float).eps))
    keep = max(1, min(int(l_max), rank))
    total = float(np.sum(s ** 2))
    energy_ratio = float(1.0 - np.sum(s[:keep] ** 2) / total)
    logger.info("svd truncation kept %d of %d columns, energy ratio %.3e",
                keep, s.size, energy_ratio)
    return u[:, :keep] * s[:keep], vt[:keep].T.copy(), s[:keep].copy(), energy_ratio


def build_expansion(dataset, epsilon=0.05, l_max=25):
    """Run the full basis pipeline on a dataset and bundle the artifacts."""
    norm = normalize_covariates(dataset)
    knots = select_knots(norm, epsilon)
    a = tps_exponent(dataset.p)
    phi = rbf_matrix(norm, knots, a)
    design, right, sing, ratio = truncate_svd(phi, l_max)
    return BasisExpansion(
        knots=knots,
        exponent=a,
        column_min=dataset.column_min.copy(),
        column_max=dataset.column_max.copy(),
        epsilon=float(epsilon),
        design=design,
        right_factor=right,
        singular_values=sing,
        energy_ratio=ratio,
    )


def basis_rows(expansion, points):
    """Expand raw-scale points into the retained column space, (k, l)."""
    norm = normalize_points(points, expansion.column_min, expansion.column_max)
    phi = rbf_matrix(norm, expansion.knots, expansion.exponent)
    return phi @ expansion.right_factor


def basis_row(expansion, point):
    """Expand a single raw-scale point; returns a length-l vector."""
    return basis_rows(expansion, np.atleast_2d(np.asarray(point, dtype=float)))[0]
