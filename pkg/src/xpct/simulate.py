"""Forward simulation: projections, transmission, diffraction, noise, datasets.

Per view the chain is: project the phantom, form the complex transmission
T = exp(-A - i*phi), edge-pad, propagate to the detector, take intensities,
draw Poisson counts, and flat-field normalize.  The bright field of a unit
plane wave is uniform, so b equals the incident flux and d is zero; full
frames are stored anyway so externally recorded data with structured flats
runs through the same pipeline.
"""

from dataclasses import dataclass

import numpy as np

from . import dataset as dataset_io
from .core import Volume, pad_edge
from .errors import InvalidArgumentError, InvalidDataError
from .fresnel import propagate, propagator_kernel
from .phantom import build_phantom, project_volume
from .validation import as_image, check_finite, check_nonnegative, check_same_shape


@dataclass(frozen=True, eq=False)
class ProjectionPair:
    """Absorption projection A (dimensionless) and phase projection phi (rad)."""

    absorption: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        check_same_shape(self.absorption, self.phase, "absorption", "phase")
        check_finite(self.absorption, "absorption")
        check_finite(self.phase, "phase")
        check_nonnegative(self.absorption, "absorption")


def projections_from_volumes(delta_volume, beta_volume, angle, geometry):
    """Projection pair from prebuilt delta/beta volumes at one view angle."""
    k = 2 * np.pi / geometry.wavelength
    return ProjectionPair(
        absorption=k * project_volume(beta_volume, angle, geometry),
        phase=k * project_volume(delta_volume, angle, geometry),
    )


def projections_from_phantom(spec, angle, geometry):
    """Voxelize a phantom and project it at one view angle."""
    delta_volume, beta_volume = build_phantom(spec)
    return projections_from_volumes(delta_volume, beta_volume, angle, geometry)


def transmission_from_projections(pair):
    """Complex transmission T = exp(-A - i*phi)."""
    return np.exp(-pair.absorption - 1j * pair.phase)


def forward_intensity(transmission, geometry, flux, pad_factor=1.5):
    """Expected detector counts for a transmission map under a unit plane wave.

    The transmission is edge-padded before propagation and the intensity is
    cropped back to the detector grid.  Returns flux * |H T|^2.
    """
    if not flux > 0:
        raise InvalidArgumentError("flux must be > 0")
    padded, window = pad_edge(transmission, pad_factor)
    kernel = propagator_kernel(geometry, *padded.shape)
    field = propagate(padded, kernel)
    return flux * np.abs(window.crop(field)) ** 2


def apply_poisson_noise(intensity, seed, view=0):
    """Replace each pixel by a Poisson draw with that mean.

    Each (seed, view) pair keys an independent counter-based (Philox) stream,
    so a frame's noise does not depend on which worker simulates it or in
    what order views are processed.
    """
    intensity = np.asarray(intensity, dtype=np.float64)
    check_nonnegative(intensity, "intensity")
    check_finite(intensity, "intensity")
    key = np.array([np.uint64(np.int64(seed)), np.uint64(view)], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.poisson(intensity).astype(np.float64)


def normalize(raw, bright, dark):
    """Square root of the flat-field-normalized intensity.

    y = sqrt(max(0, (raw - dark) / (bright - dark))); radicands driven
    negative by noise are clamped to zero.
    """
    raw = as_image(raw, "raw")
    bright = as_image(bright, "bright")
    dark = as_image(dark, "dark")
    check_same_shape(raw, bright, "raw", "bright")
    check_same_shape(raw, dark, "raw", "dark")
    bad = bright <= dark
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise InvalidDataError(
            f"bright field must exceed dark field everywhere; first offending "
            f"pixel {idx}: bright={bright[idx]!r} dark={dark[idx]!r}"
        )
    ratio = (raw - dark) / (bright - dark)
    return np.sqrt(np.maximum(0.0, ratio))


def downsample_volume(volume, factor=2):
    """Block-average a volume by an integer factor per axis."""
    n_u, n_v, n_w = volume.shape
    if any(n % factor for n in volume.shape):
        raise InvalidArgumentError("volume dims must divide by the factor")
    v = volume.values.reshape(
        n_u // factor, factor, n_v // factor, factor, n_w // factor, factor
    ).mean(axis=(1, 3, 5))
    return Volume(v, volume.voxel_width * factor, quantity=volume.quantity)


def simulate_views(spec, geometry, flux, seed, noise=True, pad_factor=1.5):
    """Run the per-view forward chain for every angle.

    Returns a dict of stacked arrays: raw counts, bright, dark, normalized
    frames, the true |T| and phase per view, and the (downsampled) ground
    truth volumes.
    """
    delta_volume, beta_volume = build_phantom(spec)
    n_views = geometry.n_views
    shape = (n_views, geometry.n_u, geometry.n_v)
    raw = np.empty(shape)
    normalized = np.empty(shape)
    transmission_true = np.empty(shape)
    phase_true = np.empty(shape)
    bright = np.full((geometry.n_u, geometry.n_v), float(flux))
    dark = np.zeros_like(bright)

    for i, angle in enumerate(geometry.angles):
        pair = projections_from_volumes(delta_volume, beta_volume, angle, geometry)
        transmission = transmission_from_projections(pair)
        expected = forward_intensity(transmission, geometry, flux, pad_factor)
        counts = apply_poisson_noise(expected, seed, view=i) if noise else expected
        raw[i] = counts
        normalized[i] = normalize(counts, bright, dark)
        transmission_true[i] = np.abs(transmission)
        phase_true[i] = pair.phase

    factor = int(round(geometry.pixel_pitch / spec.voxel_width))
    if factor > 1:
        delta_volume = downsample_volume(delta_volume, factor)
        beta_volume = downsample_volume(beta_volume, factor)

    return {
        "raw": raw,
        "bright": bright,
        "dark": dark,
        "normalized": normalized,
        "transmission_true": transmission_true,
        "phase_true": phase_true,
        "delta_volume": delta_volume,
        "beta_volume": beta_volume,
    }


def simulate_dataset(spec, geometry, flux, seed, out_dir, noise=True,
                     pad_factor=1.5):
    """Simulate all views and persist them as a dataset directory."""
    result = simulate_views(spec, geometry, flux, seed, noise=noise,
                            pad_factor=pad_factor)
    arrays = {
        "raw": (result["raw"], "raw"),
        "bright": (result["bright"], "raw"),
        "dark": (result["dark"], "raw"),
        "normalized": (result["normalized"], "normalized"),
        "transmission_true": (result["transmission_true"], "transmission"),
        "phase_true": (result["phase_true"], "phase"),
        "delta_volume": (result["delta_volume"].values, "volume"),
        "beta_volume": (result["beta_volume"].values, "volume"),
    }
    provenance = {
        "seed": int(seed),
        "flux": float(flux),
        "noise": bool(noise),
        "pad_factor": float(pad_factor),
        "voxel_width_m": result["delta_volume"].voxel_width,
        "phantom": spec.to_dict(),
    }
    manifest = dataset_io.save_dataset(out_dir, geometry, arrays, provenance)
    return result, manifest
