"""Ray-ellipsoid geolocation: per-line ground coordinates and grids.

The chain per pixel: propagate the orbit to the (offset-corrected) line
time, interpolate the attitude, build the body-frame line of sight, rotate
into the Earth-fixed frame, and intersect with the WGS84 ellipsoid at zero
height.  Terrain is deliberately ignored: the output is a systematic, not
an ortho, product.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import IoFailure, NoIntersection, OutOfBounds
from ..raster import BandId, RawScene
from .attitude import slerp_attitude
from .camera import ImagerModel, pixel_los
from .frames import WGS84_A_KM, WGS84_B_KM, ecef_to_geodetic, eci_to_ecef
from .metadata import AcqMetadata


@dataclass(frozen=True)
class GeodeticCoord:
    """WGS84 geodetic position: degrees latitude/longitude, meters height."""

    lat: float
    lon: float
    alt: float


def intersect_ellipsoid(r_ecef_km: np.ndarray, dir_ecef: np.ndarray) -> GeodeticCoord:
    """Nearest intersection of a ray with the WGS84 ellipsoid.

    Solves the quadratic for the scaled ellipsoid equation and keeps the
    smallest positive root, then converts to geodetic coordinates.
    """
    r = np.asarray(r_ecef_km, dtype=np.float64)
    d = np.asarray(dir_ecef, dtype=np.float64)
    d = d / np.linalg.norm(d)
    inv_a2 = 1.0 / (WGS84_A_KM * WGS84_A_KM)
    inv_b2 = 1.0 / (WGS84_B_KM * WGS84_B_KM)
    qa = (d[0] * d[0] + d[1] * d[1]) * inv_a2 + d[2] * d[2] * inv_b2
    qb = 2.0 * ((r[0] * d[0] + r[1] * d[1]) * inv_a2 + r[2] * d[2] * inv_b2)
    qc = (r[0] * r[0] + r[1] * r[1]) * inv_a2 + r[2] * r[2] * inv_b2 - 1.0
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        raise NoIntersection("line of sight misses the ellipsoid")
    sqrt_disc = math.sqrt(disc)
    s1 = (-qb - sqrt_disc) / (2.0 * qa)
    s2 = (-qb + sqrt_disc) / (2.0 * qa)
    s = min(x for x in (s1, s2) if x > 0.0) if max(s1, s2) > 0.0 else None
    if s is None:
        raise NoIntersection("both intersection points lie behind the ray origin")
    point = r + s * d
    lat, lon, alt = ecef_to_geodetic(point)
    return GeodeticCoord(lat=lat, lon=lon, alt=alt)


def georeference_line(
    line_idx: int,
    scene: RawScene,
    metadata: AcqMetadata,
    imager: ImagerModel | None = None,
    columns=None,
    band: BandId = BandId.RED,
) -> list[GeodeticCoord]:
    """Ground coordinates of the requested columns of one image line.

    One orbit propagation and one attitude interpolation serve the whole
    line; pass ``imager`` to georeference with adjusted offsets without
    touching the sidecar.
    """
    if not 0 <= line_idx < scene.lines:
        raise OutOfBounds(f"line {line_idx} outside [0, {scene.lines})")
    if imager is None:
        imager = metadata.imager
    if columns is None:
        columns = range(scene.width)
    t = float(scene.line_times[line_idx]) + imager.time_offset_s
    state = metadata.orbit.state_at(t)
    q = slerp_attitude(metadata.attitude, t)
    r_ecef = eci_to_ecef(state.r_eci, t)
    coords = []
    for col in columns:
        v_body = pixel_los(imager, band, col)
        v_eci = q.rotate(v_body)
        d_ecef = eci_to_ecef(v_eci, t)
        coords.append(intersect_ellipsoid(r_ecef, d_ecef))
    return coords


@dataclass
class GeoGrid:
    """Gridded geolocation: coordinates at sampled (line, column) nodes."""

    lines: np.ndarray
    columns: np.ndarray
    lat: np.ndarray
    lon: np.ndarray
    alt: np.ndarray
    corners: dict = field(default_factory=dict)
    mean_gsd_m: float = 0.0


def _sample_indices(extent: int, step: int) -> np.ndarray:
    idx = list(range(0, extent, step))
    if idx[-1] != extent - 1:
        idx.append(extent - 1)
    return np.asarray(idx, dtype=int)


def _ecef_grid(grid: GeoGrid) -> np.ndarray:
    from .frames import geodetic_to_ecef

    ny, nx = grid.lat.shape
    out = np.empty((ny, nx, 3))
    for i in range(ny):
        for j in range(nx):
            out[i, j] = geodetic_to_ecef(grid.lat[i, j], grid.lon[i, j], grid.alt[i, j])
    return out


def _mean_gsd_m(grid: GeoGrid) -> float:
    ecef = _ecef_grid(grid)
    samples = []
    col_steps = np.diff(grid.columns)
    line_steps = np.diff(grid.lines)
    across = np.linalg.norm(np.diff(ecef, axis=1), axis=2) * 1000.0 / col_steps[np.newaxis, :]
    along = np.linalg.norm(np.diff(ecef, axis=0), axis=2) * 1000.0 / line_steps[:, np.newaxis]
    samples.append(across.ravel())
    samples.append(along.ravel())
    return float(np.concatenate(samples).mean())


def build_geogrid(
    scene: RawScene,
    metadata: AcqMetadata,
    imager: ImagerModel | None = None,
    step: int = 64,
    band: BandId = BandId.RED,
) -> GeoGrid:
    """Sample ``georeference_line`` on a regular grid (first/last always kept)."""
    if step < 1:
        raise OutOfBounds(f"step {step} < 1")
    line_idx = _sample_indices(scene.lines, step)
    col_idx = _sample_indices(scene.width, step)
    ny, nx = len(line_idx), len(col_idx)
    lat = np.empty((ny, nx))
    lon = np.empty((ny, nx))
    alt = np.empty((ny, nx))
    for i, line in enumerate(line_idx):
        coords = georeference_line(int(line), scene, metadata, imager, col_idx, band)
        lat[i] = [c.lat for c in coords]
        lon[i] = [c.lon for c in coords]
        alt[i] = [c.alt for c in coords]
    grid = GeoGrid(lines=line_idx, columns=col_idx, lat=lat, lon=lon, alt=alt)
    grid.corners = {
        "top_left": (float(lat[0, 0]), float(lon[0, 0])),
        "top_right": (float(lat[0, -1]), float(lon[0, -1])),
        "bottom_left": (float(lat[-1, 0]), float(lon[-1, 0])),
        "bottom_right": (float(lat[-1, -1]), float(lon[-1, -1])),
    }
    if ny > 1 and nx > 1:
        grid.mean_gsd_m = _mean_gsd_m(grid)
    return grid


def fit_world_file(grid: GeoGrid) -> tuple[tuple[float, ...], float]:
    """Fit the six-parameter affine pixel-to-ground map over the grid nodes.

    Returns ((A, D, B, E, C, F), rms_residual_deg) for the convention

        lon = A * column + B * line + C
        lat = D * column + E * line + F

    The residual reports how non-affine the true geolocation is.
    """
    cols, lins = np.meshgrid(grid.columns.astype(float), grid.lines.astype(float))
    design = np.stack([cols.ravel(), lins.ravel(), np.ones(cols.size)], axis=1)
    lon_coef, _, _, _ = np.linalg.lstsq(design, grid.lon.ravel(), rcond=None)
    lat_coef, _, _, _ = np.linalg.lstsq(design, grid.lat.ravel(), rcond=None)
    resid = np.concatenate(
        [design @ lon_coef - grid.lon.ravel(), design @ lat_coef - grid.lat.ravel()]
    )
    rms = float(np.sqrt(np.mean(resid * resid)))
    a, b, c = lon_coef
    d, e, f = lat_coef
    return (float(a), float(d), float(b), float(e), float(c), float(f)), rms


def save_geogrid(grid: GeoGrid, json_path, world_path=None) -> None:
    """Write the grid JSON and, optionally, the six-line ESRI world file."""
    coeffs, rms = fit_world_file(grid)
    doc = {
        "schema": 1,
        "lines": [int(v) for v in grid.lines],
        "columns": [int(v) for v in grid.columns],
        "lat": grid.lat.tolist(),
        "lon": grid.lon.tolist(),
        "alt_m": grid.alt.tolist(),
        "corners": {k: list(v) for k, v in grid.corners.items()},
        "mean_gsd_m": grid.mean_gsd_m,
        "world_file": {"coefficients": list(coeffs), "rms_residual_deg": rms},
    }
    try:
        Path(json_path).write_text(json.dumps(doc, sort_keys=True))
        if world_path is not None:
            lines = "\n".join(f"{v:.12f}" for v in coeffs) + "\n"
            Path(world_path).write_text(lines)
    except OSError as exc:
        raise IoFailure(f"cannot write geogrid: {exc}") from exc


def load_geogrid(json_path) -> GeoGrid:
    try:
        doc = json.loads(Path(json_path).read_text())
    except OSError as exc:
        raise IoFailure(f"cannot read {json_path}: {exc}") from exc
    return GeoGrid(
        lines=np.asarray(doc["lines"], dtype=int),
        columns=np.asarray(doc["columns"], dtype=int),
        lat=np.asarray(doc["lat"]),
        lon=np.asarray(doc["lon"]),
        alt=np.asarray(doc["alt_m"]),
        corners={k: tuple(v) for k, v in doc["corners"].items()},
        mean_gsd_m=float(doc["mean_gsd_m"]),
    )
