"""Ground-truth scene generator.

Manufactures raw pushbroom scenes with known vignetting, known inter-band
warps, and known orbit/attitude metadata, together with a truth pack that
records every applied distortion.  The truth pack is the independent
oracle behind the correction pipeline's tests: the generator renders and
distorts with its own code paths (hand-rolled bilinear warping, its own
ray/ellipsoid math) so it never shares the machinery it is used to judge.

Injected biases model unknown systematic errors: the *truth* geometry uses
them, the emitted metadata does not.  A positive ``time_s`` bias makes the
recorded line times early by ``time_s * time_drift`` seconds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatch, GridMismatch, SpecInvalid
from .raster import BAND_BY_NAME, BAND_COUNT, BAND_NAMES, BandId, CalibrationTable, RawScene
from .georef.accuracy import GeorefErrorStats
from .georef.attitude import AttitudeSample, Quaternion
from .georef.camera import ImagerModel, rpy_matrix
from .georef.frames import (
    WGS84_A_KM,
    WGS84_B_KM,
    ecef_to_geodetic,
    eci_to_ecef,
    enu_basis,
    geodetic_to_ecef,
)
from .georef.geolocate import GeodeticCoord, GeoGrid
from .georef.metadata import AcqMetadata
from .georef.orbits import CircularOrbit, orbit_from_spec

TEXTURES = ("flat", "checkerboard", "fractal-noise", "urban-blocks")
PROFILES = ("quadratic", "cos4")
ATTITUDE_KINDS = ("nadir", "constant-offset", "nutation")


@dataclass
class SynthSpec:
    """Recipe for one synthetic acquisition."""

    seed: int = 0
    width: int = 512
    lines: int = 512
    bit_depth: int = 8
    texture: str = "urban-blocks"
    texture_base: float = 110.0
    texture_contrast: float = 70.0
    checker_size: int = 32
    vignette_falloff: float = 40.0
    vignette_profile: str = "quadratic"
    band_warp: dict = field(default_factory=dict)
    dark_level: float = 0.0
    noise_sigma: float = 0.0
    orbit: dict = field(
        default_factory=lambda: {
            "kind": "circular",
            "altitude_km": 510.0,
            "inclination_deg": 97.6,
            "raan_deg": 0.0,
            "arg_lat0_deg": -1.0,
            "epoch_unix": 1525487400.0,
        }
    )
    attitude_profile: dict = field(default_factory=lambda: {"kind": "nadir"})
    injected_bias: tuple = (0.0, 0.0, 0.0)  # roll deg, pitch deg, time s
    time_drift: float = 1.0
    focal_length_mm: float = 238.0
    pixel_pitch_um: float = 7.0
    band_row_offset: dict = field(default_factory=dict)
    boresight_rpy_deg: tuple = (0.0, 0.0, 0.0)
    line_period_s: float | None = None
    attitude_sample_period_s: float = 1.0
    grid_step: int = 64

    def validate(self) -> None:
        if self.width < 8 or self.lines < 8:
            raise SpecInvalid(f"scene {self.width}x{self.lines} too small")
        if self.bit_depth not in (8, 16):
            raise SpecInvalid(f"bit_depth {self.bit_depth} not 8 or 16")
        if self.texture not in TEXTURES:
            raise SpecInvalid(f"texture {self.texture!r} not in {TEXTURES}")
        if not 0.0 <= self.vignette_falloff <= 90.0:
            raise SpecInvalid(f"vignette_falloff {self.vignette_falloff} outside [0, 90]")
        if self.vignette_profile not in PROFILES:
            raise SpecInvalid(f"vignette_profile {self.vignette_profile!r} not in {PROFILES}")
        if self.attitude_profile.get("kind") not in ATTITUDE_KINDS:
            raise SpecInvalid(f"attitude kind {self.attitude_profile!r}")
        for name, warp in (self.band_warp or {}).items():
            if name not in BAND_BY_NAME:
                raise SpecInvalid(f"unknown band {name!r} in band_warp")
            order = int(warp.get("order", 2))
            if order > 3:
                raise SpecInvalid(f"warp order {order} > 3")
            peak = max(
                (abs(float(c)) for c in list(warp["coeff_dx"]) + list(warp["coeff_dy"])),
                default=0.0,
            )
            if peak >= self.width / 8:
                raise SpecInvalid(f"warp magnitude {peak} >= width/8")
        if self.dark_level < 0 or self.noise_sigma < 0:
            raise SpecInvalid("dark_level and noise_sigma must be >= 0")

    @classmethod
    def from_dict(cls, doc: dict) -> "SynthSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise SpecInvalid(f"unknown spec fields: {sorted(unknown)}")
        spec = cls(**doc)
        if isinstance(spec.injected_bias, list):
            spec.injected_bias = tuple(spec.injected_bias)
        if isinstance(spec.boresight_rpy_deg, list):
            spec.boresight_rpy_deg = tuple(spec.boresight_rpy_deg)
        return spec

    def to_dict(self) -> dict:
        doc = {}
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            doc[name] = list(value) if isinstance(value, tuple) else value
        return doc


@dataclass
class TruthPack:
    """Everything the generator knows that the pipeline has to discover."""

    clean: RawScene
    calib: CalibrationTable
    warp_fields: dict
    profile: np.ndarray
    metadata: AcqMetadata
    truth_grid: GeoGrid
    true_line_times: np.ndarray
    track_dir_en: tuple
    ground_speed_kms: float
    altitude_km: float
    injected_bias: tuple
    time_drift: float


# ----------------------------------------------------------------- textures

def _texture_flat(spec: SynthSpec) -> np.ndarray:
    return np.full((spec.lines, spec.width), spec.texture_base, dtype=np.float64)


def _texture_checkerboard(spec: SynthSpec) -> np.ndarray:
    yy, xx = np.mgrid[0 : spec.lines, 0 : spec.width]
    parity = ((xx // spec.checker_size) + (yy // spec.checker_size)) % 2
    lo = spec.texture_base - spec.texture_contrast / 2.0
    hi = spec.texture_base + spec.texture_contrast / 2.0
    return np.where(parity == 0, lo, hi).astype(np.float64)


def _texture_fractal(spec: SynthSpec) -> np.ndarray:
    rng = np.random.default_rng([spec.seed, 23])
    out = np.zeros((spec.lines, spec.width))
    weight_total = 0.0
    for octave, cell in enumerate((128, 64, 32, 16)):
        weight = 1.0 / (octave + 1)
        coarse = rng.standard_normal((spec.lines // cell + 2, spec.width // cell + 2))
        yy, xx = np.mgrid[0 : spec.lines, 0 : spec.width]
        out += weight * ndimage.map_coordinates(
            coarse, [yy / cell, xx / cell], order=1, mode="nearest"
        )
        weight_total += weight
    out /= weight_total
    scale = spec.texture_contrast / max(out.std() * 2.0, 1e-9)
    return spec.texture_base + out * scale


def _texture_urban(spec: SynthSpec) -> np.ndarray:
    rng = np.random.default_rng([spec.seed, 31])
    lo = max(spec.texture_base - spec.texture_contrast, 1.0)
    hi = spec.texture_base + spec.texture_contrast
    img = np.full((spec.lines, spec.width), spec.texture_base - spec.texture_contrast / 2.0)
    n_blocks = max(20, spec.lines * spec.width // 1100)
    xs = rng.integers(0, spec.width, n_blocks)
    ys = rng.integers(0, spec.lines, n_blocks)
    ws = rng.integers(6, 36, n_blocks)
    hs = rng.integers(6, 36, n_blocks)
    vals = rng.uniform(lo, hi, n_blocks)
    for x0, y0, bw, bh, val in zip(xs, ys, ws, hs, vals):
        img[y0 : min(y0 + bh, spec.lines), x0 : min(x0 + bw, spec.width)] = val
    # Road grid for long straight edges.
    for x in range(0, spec.width, 56):
        img[:, x : x + 2] = lo * 0.6
    for y in range(0, spec.lines, 56):
        img[y : y + 2, :] = lo * 0.6
    return img


_TEXTURE_FN = {
    "flat": _texture_flat,
    "checkerboard": _texture_checkerboard,
    "fractal-noise": _texture_fractal,
    "urban-blocks": _texture_urban,
}


# ------------------------------------------------------- distortion helpers

def _poly_terms(order: int, xn: np.ndarray, yn: np.ndarray) -> list:
    terms = [np.ones_like(xn)]
    for total in range(1, order + 1):
        for j in range(total + 1):
            i = total - j
            terms.append(xn ** i * yn ** j)
    return terms


def eval_warp(warp: dict, x: np.ndarray, y: np.ndarray, width: int, height: int):
    """Evaluate a truth warp field (pixels) at pixel coordinates."""
    order = int(warp.get("order", 2))
    xn = np.asarray(x, dtype=np.float64) / max(width - 1, 1)
    yn = np.asarray(y, dtype=np.float64) / max(height - 1, 1)
    terms = _poly_terms(order, xn, yn)
    cdx = list(map(float, warp["coeff_dx"]))
    cdy = list(map(float, warp["coeff_dy"]))
    wx = sum(c * t for c, t in zip(cdx, terms))
    wy = sum(c * t for c, t in zip(cdy, terms))
    return wx, wy


def _bilinear_clamped(img: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Edge-clamped bilinear sampling, in the canonical weighting order

        (1-fy) * ((1-fx) p00 + fx p01) + fy * ((1-fx) p10 + fx p11)

    which the truth-reproduction oracle mirrors exactly.
    """
    h, w = img.shape
    xs = np.clip(xs, 0.0, w - 1.0)
    ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.clip(np.floor(xs).astype(int), 0, w - 2) if w > 1 else np.zeros_like(xs, dtype=int)
    y0 = np.clip(np.floor(ys).astype(int), 0, h - 2) if h > 1 else np.zeros_like(ys, dtype=int)
    fx = xs - x0
    fy = ys - y0
    p00 = img[y0, x0]
    p01 = img[y0, x0 + 1]
    p10 = img[y0 + 1, x0]
    p11 = img[y0 + 1, x0 + 1]
    return (1.0 - fy) * ((1.0 - fx) * p00 + fx * p01) + fy * ((1.0 - fx) * p10 + fx * p11)


def vignette_profile(spec_or_kind, falloff: float | None = None, width: int | None = None
                     ) -> np.ndarray:
    """Column multiplier v(u): 1 at center, 1 - falloff/100 at the edges.

    Quadratic uses v(u) = 1 - f (2u-1)^2; the cos^4 variant matches the
    same edge falloff but with lens-law curvature, for model-mismatch
    studies.
    """
    if isinstance(spec_or_kind, SynthSpec):
        kind = spec_or_kind.vignette_profile
        falloff = spec_or_kind.vignette_falloff
        width = spec_or_kind.width
    else:
        kind = spec_or_kind
    f = falloff / 100.0
    u = np.arange(width, dtype=np.float64) / (width - 1)
    if kind == "quadratic":
        return 1.0 - f * (2.0 * u - 1.0) ** 2
    alpha = math.acos((1.0 - f) ** 0.25) if f > 0 else 0.0
    return np.cos(alpha * (2.0 * u - 1.0)) ** 4


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


# ------------------------------------------------------ truth geolocation

def _attitude_matrix(orbit, profile: dict, t: float, epoch: float) -> np.ndarray:
    """Body-to-ECI matrix of the commanded attitude at time t.

    Built directly from the continuous profile; the sidecar only ever sees
    discrete quaternion samples of this.
    """
    state = orbit.state_at(t)
    r = state.r_eci
    v = state.v_eci
    z = -r / np.linalg.norm(r)
    y = v - (v @ z) * z
    y = y / np.linalg.norm(y)
    x = np.cross(y, z)
    m = np.stack([x, y, z], axis=1)
    kind = profile.get("kind", "nadir")
    if kind == "constant-offset":
        roll, pitch, yaw = profile.get("rpy_deg", (0.0, 0.0, 0.0))
        m = m @ rpy_matrix(roll, pitch, yaw)
    elif kind == "nutation":
        amp = float(profile.get("amplitude_deg", 0.28))
        period = float(profile.get("period_s", 73.0))
        m = m @ rpy_matrix(amp * math.sin(2.0 * math.pi * (t - epoch) / period), 0.0, 0.0)
    return m


def _intersect_wgs84(r_km: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Generator-local ray/ellipsoid solve (kept separate from the pipeline's)."""
    d = d / np.linalg.norm(d)
    wa2 = WGS84_A_KM * WGS84_A_KM
    wb2 = WGS84_B_KM * WGS84_B_KM
    qa = d[0] ** 2 / wa2 + d[1] ** 2 / wa2 + d[2] ** 2 / wb2
    qb = 2.0 * (r_km[0] * d[0] / wa2 + r_km[1] * d[1] / wa2 + r_km[2] * d[2] / wb2)
    qc = r_km[0] ** 2 / wa2 + r_km[1] ** 2 / wa2 + r_km[2] ** 2 / wb2 - 1.0
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0:
        raise SpecInvalid("truth ray misses the ellipsoid; check the orbit/attitude spec")
    s = (-qb - math.sqrt(disc)) / (2.0 * qa)
    return r_km + s * d


def _truth_ground_point(orbit, spec: SynthSpec, imager: ImagerModel, t: float,
                        column: float, epoch: float) -> GeodeticCoord:
    roll_b, pitch_b, _ = spec.injected_bias
    r0, p0, y0 = spec.boresight_rpy_deg
    pitch_mm = spec.pixel_pitch_um * 1e-3
    ray = np.array(
        [
            (column - (spec.width - 1) / 2.0) * pitch_mm,
            imager.band_row_offset.get(BandId.RED, 0.0) * pitch_mm,
            spec.focal_length_mm,
        ]
    )
    ray /= np.linalg.norm(ray)
    v_body = rpy_matrix(r0 + roll_b, p0 + pitch_b, y0) @ ray
    m = _attitude_matrix(orbit, spec.attitude_profile, t, epoch)
    v_eci = m @ v_body
    r_ecef = eci_to_ecef(orbit.state_at(t).r_eci, t)
    d_ecef = eci_to_ecef(v_eci, t)
    ground = _intersect_wgs84(r_ecef, d_ecef)
    lat, lon, alt = ecef_to_geodetic(ground)
    return GeodeticCoord(lat=lat, lon=lon, alt=alt)


def _grid_indices(extent: int, step: int) -> np.ndarray:
    idx = list(range(0, extent, step))
    if idx[-1] != extent - 1:
        idx.append(extent - 1)
    return np.asarray(idx, dtype=int)


# ----------------------------------------------------------------- generate

def _orbit_doc(spec_orbit: dict) -> dict:
    """Spec orbit description (with a 'kind' tag) to sidecar form."""
    kind = spec_orbit.get("kind", "circular")
    if kind == "circular":
        return {"circular_orbit": {k: v for k, v in spec_orbit.items() if k != "kind"}}
    if kind == "tle":
        return {"tle": list(spec_orbit["lines"])}
    raise SpecInvalid(f"unknown orbit kind {kind!r}")


def generate(spec: SynthSpec) -> tuple[RawScene, TruthPack]:
    """Render, distort, and describe one synthetic acquisition.

    Deterministic for a fixed seed.  Stage order: texture, per-band warp
    (inverse-map bilinear), vignette multiply, dark offset, per-line
    Gaussian noise, round-half-up quantization.
    """
    spec.validate()
    max_dn = (1 << spec.bit_depth) - 1

    texture = _TEXTURE_FN[spec.texture](spec)
    clean_q = np.clip(_round_half_up(texture), 0, max_dn).astype(np.uint16)

    orbit = orbit_from_spec(_orbit_doc(spec.orbit))
    if isinstance(orbit, CircularOrbit):
        epoch = orbit.epoch_unix
        altitude_km = orbit.altitude_km
        v_ground = orbit.ground_speed_kms
    else:
        epoch = orbit.elements.epoch_unix
        state = orbit.state_at(epoch)
        altitude_km = float(np.linalg.norm(state.r_eci)) - WGS84_A_KM
        r0 = eci_to_ecef(orbit.state_at(epoch).r_eci, epoch)
        r1 = eci_to_ecef(orbit.state_at(epoch + 1.0).r_eci, epoch + 1.0)
        v_ground = float(np.linalg.norm(r1 - r0)) * WGS84_A_KM / float(np.linalg.norm(r0))

    imager = ImagerModel(
        focal_length_mm=spec.focal_length_mm,
        pixel_pitch_um=spec.pixel_pitch_um,
        columns=spec.width,
        band_row_offset={
            BAND_BY_NAME[name]: float(v) for name, v in (spec.band_row_offset or {}).items()
        },
        boresight_rpy_deg=spec.boresight_rpy_deg,
        time_offset_s=0.0,
    )
    gsd_km = altitude_km * imager.ifov_rad
    line_period = spec.line_period_s if spec.line_period_s else gsd_km / v_ground

    t_true = epoch + np.arange(spec.lines, dtype=np.float64) * line_period
    time_bias = spec.injected_bias[2] * spec.time_drift
    t_recorded = t_true - time_bias

    # Per-band geometric warp, then radiometry.
    profile = vignette_profile(spec)
    yy, xx = np.mgrid[0 : spec.lines, 0 : spec.width].astype(np.float64)
    raw_planes = np.empty((BAND_COUNT, spec.lines, spec.width), dtype=np.uint16)
    warp_fields: dict = {}
    for band in BandId:
        warp = (spec.band_warp or {}).get(BAND_NAMES[band])
        src = clean_q.astype(np.float64)
        if warp:
            wx, wy = eval_warp(warp, xx, yy, spec.width, spec.lines)
            src = _bilinear_clamped(src, xx + wx, yy + wy)
            warp_fields[band] = {
                "order": int(warp.get("order", 2)),
                "coeff_dx": [float(c) for c in warp["coeff_dx"]],
                "coeff_dy": [float(c) for c in warp["coeff_dy"]],
            }
        else:
            warp_fields[band] = None
        plane = src * profile[np.newaxis, :] + spec.dark_level
        if spec.noise_sigma > 0:
            noise = np.empty_like(plane)
            for line in range(spec.lines):
                rng = np.random.default_rng([spec.seed, int(band), line, 7])
                noise[line] = rng.normal(0.0, spec.noise_sigma, spec.width)
            plane = plane + noise
        raw_planes[int(band)] = np.clip(_round_half_up(plane), 0, max_dn).astype(np.uint16)

    raw = RawScene(raw_planes, t_recorded, spec.bit_depth)
    clean = RawScene(np.broadcast_to(clean_q, (BAND_COUNT,) + clean_q.shape).copy(),
                     t_true, spec.bit_depth)

    calib = CalibrationTable(
        response=np.tile(1.0 / profile, (BAND_COUNT, 1)),
        dark=np.full((BAND_COUNT, spec.width), float(spec.dark_level)),
    )

    # Attitude samples for the sidecar: the commanded profile, no bias.
    pad = 2.0 * spec.attitude_sample_period_s + abs(time_bias)
    n_samples = int(math.ceil((t_true[-1] - t_true[0] + 2 * pad) / spec.attitude_sample_period_s)) + 2
    sample_times = t_true[0] - pad + np.arange(n_samples) * spec.attitude_sample_period_s
    samples = [
        AttitudeSample(float(t), Quaternion.from_matrix(
            _attitude_matrix(orbit, spec.attitude_profile, float(t), epoch)))
        for t in sample_times
    ]
    metadata = AcqMetadata(orbit=orbit, attitude=samples, line_period_s=line_period,
                           imager=imager)

    # Truth geolocation grid at the true times and true (biased) geometry.
    line_idx = _grid_indices(spec.lines, spec.grid_step)
    col_idx = _grid_indices(spec.width, spec.grid_step)
    lat = np.empty((len(line_idx), len(col_idx)))
    lon = np.empty_like(lat)
    alt = np.empty_like(lat)
    for i, line in enumerate(line_idx):
        t = float(t_true[line])
        for j, col in enumerate(col_idx):
            coord = _truth_ground_point(orbit, spec, imager, t, float(col), epoch)
            lat[i, j] = coord.lat
            lon[i, j] = coord.lon
            alt[i, j] = coord.alt
    truth_grid = GeoGrid(lines=line_idx, columns=col_idx, lat=lat, lon=lon, alt=alt)
    truth_grid.corners = {
        "top_left": (float(lat[0, 0]), float(lon[0, 0])),
        "top_right": (float(lat[0, -1]), float(lon[0, -1])),
        "bottom_left": (float(lat[-1, 0]), float(lon[-1, 0])),
        "bottom_right": (float(lat[-1, -1]), float(lon[-1, -1])),
    }

    # Along-track axis: the inertial ground-velocity direction in local ENU.
    # Boresight biases displace ground points along the body axes, which are
    # built from the inertial velocity, so this choice keeps roll strictly
    # across-track and pitch strictly along-track.  The footprint's
    # Earth-fixed track is skewed from it by the Earth-rotation angle.
    mid_col = len(col_idx) // 2
    t_mid = float(t_true[line_idx[len(line_idx) // 2]])
    state_mid = orbit.state_at(t_mid)
    v_ecef_axes = eci_to_ecef(state_mid.v_eci, t_mid)
    mid_row = len(line_idx) // 2
    east, north, _ = enu_basis(lat[mid_row, mid_col], lon[mid_row, mid_col])
    track = np.array([v_ecef_axes @ east, v_ecef_axes @ north])
    track /= np.linalg.norm(track)

    # Footprint speed over ground (Earth-fixed), the scale for clock errors.
    p0 = geodetic_to_ecef(lat[0, mid_col], lon[0, mid_col], 0.0)
    p1 = geodetic_to_ecef(lat[-1, mid_col], lon[-1, mid_col], 0.0)
    span_s = float(t_true[line_idx[-1]] - t_true[line_idx[0]])
    speed_measured = float(np.linalg.norm(p1 - p0)) / span_s if span_s > 0 else v_ground

    truth = TruthPack(
        clean=clean,
        calib=calib,
        warp_fields=warp_fields,
        profile=profile,
        metadata=metadata,
        truth_grid=truth_grid,
        true_line_times=t_true,
        track_dir_en=(float(track[0]), float(track[1])),
        ground_speed_kms=speed_measured,
        altitude_km=altitude_km,
        injected_bias=tuple(spec.injected_bias),
        time_drift=spec.time_drift,
    )
    return raw, truth


# ------------------------------------------------------------ truth metrics

def truth_coreg_residual(truth: TruthPack, model, band: BandId, grid_step: int = 16) -> float:
    """Geometric residual (RMS px) of a correction model against the truth warp.

    The corrected band samples the raw band at x + d(x); the raw band
    samples the clean scene at x + w(x).  Perfect alignment means the
    composition returns to x, so the per-pixel residual is

        r(x) = d(x) + w(x + d(x))      (d = 0 for an uncorrected band).
    """
    h, w = truth.clean.lines, truth.clean.width
    if model is not None and (model.width != w or model.height != h):
        raise DimensionMismatch(
            f"model {model.width}x{model.height} vs scene {w}x{h}"
        )
    yy, xx = np.mgrid[0:h:grid_step, 0:w:grid_step].astype(np.float64)
    if model is not None:
        dx, dy = model.evaluate(xx, yy)
    else:
        dx = np.zeros_like(xx)
        dy = np.zeros_like(yy)
    warp = truth.warp_fields.get(band)
    if warp is None:
        wx = np.zeros_like(xx)
        wy = np.zeros_like(yy)
    else:
        wx, wy = eval_warp(warp, xx + dx, yy + dy, w, h)
    res = np.hypot(dx + wx, dy + wy)
    return float(np.sqrt(np.mean(res * res)))


def truth_georef_error(truth: TruthPack, grid: GeoGrid) -> GeorefErrorStats:
    """Ground distance of a computed grid from the truth grid, decomposed
    onto the truth ground-track axes (along, across-right)."""
    tg = truth.truth_grid
    if not np.array_equal(grid.lines, tg.lines) or not np.array_equal(grid.columns, tg.columns):
        raise GridMismatch("grids are not sampled at the same (line, column) nodes")
    te, tn = truth.track_dir_en
    along = []
    across = []
    for i in range(tg.lat.shape[0]):
        for j in range(tg.lat.shape[1]):
            p_true = geodetic_to_ecef(tg.lat[i, j], tg.lon[i, j], 0.0)
            p_comp = geodetic_to_ecef(grid.lat[i, j], grid.lon[i, j], 0.0)
            diff = p_comp - p_true
            east, north, _ = enu_basis(tg.lat[i, j], tg.lon[i, j])
            e = float(diff @ east)
            n = float(diff @ north)
            along.append(e * te + n * tn)
            across.append(e * tn - n * te)
    along = np.asarray(along)
    across = np.asarray(across)
    total = np.hypot(across, along)
    return GeorefErrorStats(
        mean_across_km=float(across.mean()),
        mean_along_km=float(along.mean()),
        std_across_km=float(across.std()),
        std_along_km=float(along.std()),
        rms_total_km=float(np.sqrt(np.mean(total * total))),
        across_km=across,
        along_km=along,
    )


# ------------------------------------------------------------------- files

def save_truth(truth: TruthPack, path) -> None:
    """Truth sidecar JSON: warps, profile, grid, and scalar truths."""
    doc = {
        "warp_fields": {
            BAND_NAMES[band]: warp for band, warp in truth.warp_fields.items()
        },
        "profile": [float(v) for v in truth.profile],
        "truth_grid": {
            "lines": [int(v) for v in truth.truth_grid.lines],
            "columns": [int(v) for v in truth.truth_grid.columns],
            "lat": truth.truth_grid.lat.tolist(),
            "lon": truth.truth_grid.lon.tolist(),
            "alt_m": truth.truth_grid.alt.tolist(),
        },
        "true_line_times": [float(t) for t in truth.true_line_times],
        "track_dir_en": list(truth.track_dir_en),
        "ground_speed_kms": truth.ground_speed_kms,
        "altitude_km": truth.altitude_km,
        "injected_bias": list(truth.injected_bias),
        "time_drift": truth.time_drift,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True))


def load_truth_grid(path) -> tuple[GeoGrid, tuple]:
    """Read back the truth grid and track direction from a truth sidecar."""
    doc = json.loads(Path(path).read_text())
    grid_doc = doc["truth_grid"]
    grid = GeoGrid(
        lines=np.asarray(grid_doc["lines"], dtype=int),
        columns=np.asarray(grid_doc["columns"], dtype=int),
        lat=np.asarray(grid_doc["lat"]),
        lon=np.asarray(grid_doc["lon"]),
        alt=np.asarray(grid_doc["alt_m"]),
    )
    return grid, tuple(doc["track_dir_en"])
