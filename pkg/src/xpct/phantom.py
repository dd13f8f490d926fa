"""Sphere phantoms: voxelized ground-truth volumes and parallel-beam projection.

The reference phantoms hold three spheres of radii 4, 6, and 5 um laid out
along the detector column axis.  Silicon carbide at 20 keV has a refractive
index decrement of 1.67e-6 and an absorption index of 4.77e-9, a ratio of
about 350.
"""

from dataclasses import dataclass

import numpy as np

from .core import Volume
from .errors import InvalidArgumentError

SIC_DELTA = 1.67e-6
SIC_BETA = 4.77e-9


@dataclass(frozen=True)
class Sphere:
    center: tuple        # (u, v, w) in meters, relative to the volume center
    radius: float        # meters
    delta: float         # refractive index decrement
    beta: float          # absorption index

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidArgumentError("sphere radius must be > 0")
        if self.delta < 0 or self.beta < 0:
            raise InvalidArgumentError("delta and beta must be >= 0")
        if len(self.center) != 3:
            raise InvalidArgumentError("center must be a (u, v, w) triple")


@dataclass(frozen=True)
class PhantomSpec:
    """Spheres plus the voxel grid that will hold them."""

    spheres: tuple
    volume_dims: tuple   # (n_u, n_v, n_w) voxels
    voxel_width: float   # meters

    def __post_init__(self):
        object.__setattr__(self, "spheres", tuple(self.spheres))
        dims = tuple(int(n) for n in self.volume_dims)
        if len(dims) != 3 or any(n < 1 for n in dims):
            raise InvalidArgumentError("volume_dims must be three positive counts")
        object.__setattr__(self, "volume_dims", dims)
        if not self.voxel_width > 0:
            raise InvalidArgumentError("voxel_width must be > 0")
        half = [n * self.voxel_width / 2 for n in dims]
        for s in self.spheres:
            for axis in range(3):
                if abs(s.center[axis]) + s.radius > half[axis] + 1e-15:
                    raise InvalidArgumentError(
                        f"sphere at {s.center} with radius {s.radius} extends "
                        f"outside the volume along axis {axis}"
                    )

    def to_dict(self):
        return {
            "voxel_width_m": self.voxel_width,
            "volume_dims": list(self.volume_dims),
            "spheres": [
                {
                    "center_m": list(s.center),
                    "radius_m": s.radius,
                    "delta": s.delta,
                    "beta": s.beta,
                }
                for s in self.spheres
            ],
        }

    @classmethod
    def from_dict(cls, d):
        try:
            spheres = tuple(
                Sphere(
                    center=tuple(s["center_m"]),
                    radius=float(s["radius_m"]),
                    delta=float(s["delta"]),
                    beta=float(s["beta"]),
                )
                for s in d["spheres"]
            )
            return cls(
                spheres=spheres,
                volume_dims=tuple(d["volume_dims"]),
                voxel_width=float(d["voxel_width_m"]),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidArgumentError(f"malformed phantom spec: {exc}") from exc


def _reference_spheres(deltas, betas):
    radii = (4e-6, 6e-6, 5e-6)
    offsets = (-12.9e-6, 0.0, 12.9e-6)
    return tuple(
        Sphere(center=(0.0, v, 0.0), radius=r, delta=d, beta=b)
        for v, r, d, b in zip(offsets, radii, deltas, betas)
    )


def single_material_phantom(n_u=48, n_v=64, pixel_pitch=0.645e-6):
    """Three SiC spheres on a volume grid at half the detector pitch."""
    spheres = _reference_spheres((SIC_DELTA,) * 3, (SIC_BETA,) * 3)
    return PhantomSpec(
        spheres=spheres,
        volume_dims=(2 * n_u, 2 * n_v, 2 * n_v),
        voxel_width=pixel_pitch / 2,
    )


def multi_material_phantom(n_u=48, n_v=64, pixel_pitch=0.645e-6):
    """Same layout with delta/beta ratios of 35, 350, and 700."""
    spheres = _reference_spheres(
        (SIC_DELTA, SIC_DELTA, 2 * SIC_DELTA),
        (10 * SIC_BETA, SIC_BETA, SIC_BETA),
    )
    return PhantomSpec(
        spheres=spheres,
        volume_dims=(2 * n_u, 2 * n_v, 2 * n_v),
        voxel_width=pixel_pitch / 2,
    )


def _axis_coords(n, width):
    return (np.arange(n) - (n - 1) / 2) * width


def build_phantom(spec):
    """Voxelize a phantom into (delta, beta) volumes.

    Each voxel gets the sphere value scaled by its occupied fraction,
    estimated by 2x2x2 supersampling.  Where spheres overlap, the later
    sphere in the list wins.
    """
    n_u, n_v, n_w = spec.volume_dims
    h = spec.voxel_width
    delta = np.zeros(spec.volume_dims)
    beta = np.zeros(spec.volume_dims)
    coords = [_axis_coords(n, h) for n in spec.volume_dims]
    sub = np.array([-0.25, 0.25]) * h

    for s in spec.spheres:
        lo, hi = [], []
        for axis, n in enumerate(spec.volume_dims):
            c_idx = s.center[axis] / h + (n - 1) / 2
            half = s.radius / h + 1.0
            lo.append(max(0, int(np.floor(c_idx - half))))
            hi.append(min(n, int(np.ceil(c_idx + half)) + 1))
        box = tuple(slice(l, hb) for l, hb in zip(lo, hi))
        du = coords[0][box[0]] - s.center[0]
        dv = coords[1][box[1]] - s.center[1]
        dw = coords[2][box[2]] - s.center[2]
        frac = np.zeros((du.size, dv.size, dw.size))
        for ou in sub:
            for ov in sub:
                for ow in sub:
                    d2 = ((du + ou)[:, None, None] ** 2
                          + (dv + ov)[None, :, None] ** 2
                          + (dw + ow)[None, None, :] ** 2)
                    frac += d2 <= s.radius**2
        frac /= 8.0
        inside = frac > 0
        delta[box][inside] = s.delta * frac[inside]
        beta[box][inside] = s.beta * frac[inside]

    return (Volume(delta, h, quantity="delta"),
            Volume(beta, h, quantity="beta"))


def project_volume(volume, angle, geometry):
    """Parallel-beam line integrals after rotating about the vertical axis.

    Rays are driven with a sampling step equal to the voxel width and
    bilinear interpolation in the (v, w) plane; the returned image already
    carries the length element, so values are in volume-units * meters.
    When the voxel width is an integer fraction of the detector pitch the
    fine projection is block-averaged down to detector resolution.
    """
    vol = volume.values
    if vol.size == 0:
        raise InvalidArgumentError("cannot project an empty volume")
    n_u, n_v, n_w = vol.shape
    h = volume.voxel_width

    ratio = geometry.pixel_pitch / h
    factor = int(round(ratio))
    if factor < 1 or abs(ratio - factor) > 1e-9:
        raise InvalidArgumentError(
            "detector pitch must be an integer multiple of the voxel width"
        )

    c, s = np.cos(angle), np.sin(angle)
    t = np.arange(n_v) - (n_v - 1) / 2
    m = int(np.ceil(1.5 * max(n_v, n_w)))
    steps = np.arange(m) - (m - 1) / 2

    v_idx = t[:, None] * c - steps[None, :] * s + (n_v - 1) / 2
    w_idx = t[:, None] * s + steps[None, :] * c + (n_w - 1) / 2

    valid = ((v_idx >= 0) & (v_idx <= n_v - 1)
             & (w_idx >= 0) & (w_idx <= n_w - 1))
    iv = np.clip(np.floor(v_idx).astype(np.intp), 0, n_v - 2)
    iw = np.clip(np.floor(w_idx).astype(np.intp), 0, n_w - 2)
    fv = np.where(valid, v_idx - iv, 0.0)
    fw = np.where(valid, w_idx - iw, 0.0)

    acc = (vol[:, iv, iw] * (1 - fv) * (1 - fw)
           + vol[:, iv + 1, iw] * fv * (1 - fw)
           + vol[:, iv, iw + 1] * (1 - fv) * fw
           + vol[:, iv + 1, iw + 1] * fv * fw)
    acc *= valid
    proj = acc.sum(axis=2) * h

    if factor > 1:
        if n_u % factor or n_v % factor:
            raise InvalidArgumentError(
                "volume dims must divide evenly by the pitch/voxel ratio"
            )
        proj = proj.reshape(n_u // factor, factor, n_v // factor, factor)
        proj = proj.mean(axis=(1, 3))
    return proj


def analytic_chord_projections(spec, angle, geometry):
    """Exact sphere-chord line integrals of (delta, beta) on the detector grid.

    Sums chord lengths per sphere, so it assumes non-overlapping spheres.
    Serves as the independent oracle for the voxel projector.
    """
    c, s = np.cos(angle), np.sin(angle)
    u = _axis_coords(geometry.n_u, geometry.pixel_pitch)[:, None]
    t = _axis_coords(geometry.n_v, geometry.pixel_pitch)[None, :]
    delta_proj = np.zeros((geometry.n_u, geometry.n_v))
    beta_proj = np.zeros_like(delta_proj)
    for sp in spec.spheres:
        t0 = sp.center[1] * c + sp.center[2] * s
        d2 = (u - sp.center[0]) ** 2 + (t - t0) ** 2
        chord = 2.0 * np.sqrt(np.maximum(0.0, sp.radius**2 - d2))
        delta_proj += sp.delta * chord
        beta_proj += sp.beta * chord
    return delta_proj, beta_proj
