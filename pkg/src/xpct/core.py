"""Geometry, physical units, configuration, and grid primitives.

All physical quantities are stored in SI units (meters).  keV / mm / um are
accepted only at the CLI boundary and converted on ingestion.

Grid convention used throughout the package: the center of a length-n axis
sits at index (n - 1) / 2, so the physical coordinate of sample i is
(i - (n - 1) / 2) * spacing.  This keeps a 2x-downsampled grid aligned with
its parent and puts the rotation axis in the middle of the detector.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

# CODATA: h*c in J*m and one keV in J.
HC_JOULE_METER = 1.98644586e-25
KEV_TO_JOULE = 1.602176634e-16


def wavelength_from_energy(energy_kev):
    """X-ray wavelength in meters for a photon energy in keV."""
    if not energy_kev > 0:
        raise InvalidArgumentError(f"energy must be > 0 keV, got {energy_kev!r}")
    return HC_JOULE_METER / (energy_kev * KEV_TO_JOULE)


def equispaced_angles(n_views):
    """View angles i*pi/n for i = 0..n-1, covering 180 degrees."""
    if n_views < 1:
        raise InvalidArgumentError("need at least one view")
    return np.arange(n_views) * (np.pi / n_views)


@dataclass(frozen=True, eq=False)
class AcquisitionGeometry:
    """Wavelength, propagation distance, detector grid, and view angles."""

    wavelength: float          # meters
    distance: float            # object-to-detector distance, meters
    pixel_pitch: float         # detector pixel width, meters
    n_u: int                   # detector rows
    n_v: int                   # detector columns
    angles: np.ndarray = field(default_factory=lambda: np.zeros(1))  # radians

    def __post_init__(self):
        if not self.wavelength > 0:
            raise InvalidArgumentError("wavelength must be > 0")
        if self.distance < 0:
            raise InvalidArgumentError("distance must be >= 0")
        if not self.pixel_pitch > 0:
            raise InvalidArgumentError("pixel_pitch must be > 0")
        if self.n_u < 2 or self.n_v < 2:
            raise InvalidArgumentError("detector must be at least 2x2 pixels")
        angles = np.asarray(self.angles, dtype=np.float64)
        if angles.ndim != 1 or angles.size < 1:
            raise InvalidArgumentError("angles must be a non-empty 1-D sequence")
        if np.any(angles < 0) or np.any(angles >= np.pi):
            raise InvalidArgumentError("angles must lie in [0, pi)")
        if angles.size > 1 and np.any(np.diff(angles) <= 0):
            raise InvalidArgumentError("angles must be strictly increasing")
        angles.flags.writeable = False
        object.__setattr__(self, "angles", angles)

    @property
    def n_views(self):
        return self.angles.size

    def with_distance(self, distance):
        """Copy of this geometry with a different propagation distance."""
        return AcquisitionGeometry(
            wavelength=self.wavelength,
            distance=distance,
            pixel_pitch=self.pixel_pitch,
            n_u=self.n_u,
            n_v=self.n_v,
            angles=self.angles.copy(),
        )


def fresnel_number(geometry):
    """Per-pixel Fresnel number pitch^2 / (wavelength * distance).

    Infinite at zero distance (contact regime), by convention.
    """
    if geometry.distance == 0:
        return np.inf
    return geometry.pixel_pitch**2 / (geometry.wavelength * geometry.distance)


@dataclass(frozen=True)
class RetrievalConfig:
    """Parameters shared by the linear and non-linear retrieval paths.

    gamma is the assumed ratio of refractive index decrement to absorption
    index; alpha scales the absorption exponent of the transmission
    parameterization x**(alpha + i*gamma).
    """

    alpha: float = 1.0
    gamma: float = 350.0
    xtol_rel: float = 1e-6
    max_iterations: int = 500
    lbfgs_memory: int = 10
    lower_bound: float = 1e-6
    pad_factor: float = 1.5
    upper_bound: float | None = None   # optional cap on x, off by default

    def __post_init__(self):
        if self.gamma < 0:
            raise InvalidArgumentError("gamma must be >= 0")
        if not self.xtol_rel > 0:
            raise InvalidArgumentError("xtol_rel must be > 0")
        if self.max_iterations < 0:
            raise InvalidArgumentError("max_iterations must be >= 0")
        if self.lbfgs_memory < 1:
            raise InvalidArgumentError("lbfgs_memory must be >= 1")
        if not 0 < self.lower_bound < 1:
            raise InvalidArgumentError("lower_bound must be in (0, 1)")
        if self.pad_factor < 1:
            raise InvalidArgumentError("pad_factor must be >= 1")
        if self.upper_bound is not None and self.upper_bound <= self.lower_bound:
            raise InvalidArgumentError("upper_bound must exceed lower_bound")


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Signed (wrapped) DFT frequency indices and bin widths for one grid.

    Bin k carries signed index k for k < n/2 and k - n otherwise, matching
    the layout of an unshifted DFT.  d_mu and d_nu are the frequency bin
    widths 1/(n*pitch) in cycles/meter along the row and column axes.
    """

    d_mu: float
    d_nu: float
    p: np.ndarray   # signed indices along rows
    q: np.ndarray   # signed indices along columns

    @property
    def mu(self):
        """Row-axis frequencies in cycles/meter."""
        return self.p * self.d_mu

    @property
    def nu(self):
        """Column-axis frequencies in cycles/meter."""
        return self.q * self.d_nu


def signed_index(n):
    """Signed DFT bin indices: 0..n/2-1 then -n/2..-1 for even n."""
    k = np.arange(n)
    return np.where(k < n / 2, k, k - n)


def frequency_grid(geometry, n_u, n_v):
    """Frequency grid for a (possibly padded) n_u x n_v detector-pitch grid."""
    if n_u < 2 or n_v < 2:
        raise InvalidArgumentError("grid dims must be >= 2")
    pitch = geometry.pixel_pitch
    return FrequencyGrid(
        d_mu=1.0 / (n_u * pitch),
        d_nu=1.0 / (n_v * pitch),
        p=signed_index(n_u),
        q=signed_index(n_v),
    )


@dataclass(frozen=True)
class CropWindow:
    """Placement of an original image inside a padded one."""

    top: int
    left: int
    n_u: int
    n_v: int

    @property
    def slices(self):
        return (slice(self.top, self.top + self.n_u),
                slice(self.left, self.left + self.n_v))

    def crop(self, padded):
        """Extract the original region; inverts pad_edge exactly."""
        return np.asarray(padded)[..., self.slices[0], self.slices[1]]


def padded_dim(n, pad_factor):
    """ceil(pad_factor * n) rounded up to the next even integer."""
    m = int(np.ceil(pad_factor * n))
    return m if m % 2 == 0 else m + 1


def pad_edge(image, pad_factor):
    """Center an image in an enlarged grid, replicating edge values.

    Returns the padded image and the CropWindow that recovers the original
    region bit-exactly.
    """
    if pad_factor < 1:
        raise InvalidArgumentError("pad_factor must be >= 1")
    image = np.asarray(image)
    n_u, n_v = image.shape[-2:]
    m_u, m_v = padded_dim(n_u, pad_factor), padded_dim(n_v, pad_factor)
    top, left = (m_u - n_u) // 2, (m_v - n_v) // 2
    window = CropWindow(top=top, left=left, n_u=n_u, n_v=n_v)
    if (m_u, m_v) == (n_u, n_v):
        return image.copy(), window
    pad = [(0, 0)] * (image.ndim - 2)
    pad += [(top, m_u - n_u - top), (left, m_v - n_v - left)]
    return np.pad(image, pad, mode="edge"), window


@dataclass(frozen=True, eq=False)
class Volume:
    """3-D scalar field on a cubic voxel grid, axes (u, v, w)."""

    values: np.ndarray
    voxel_width: float
    quantity: str = "raw"    # "delta", "beta", or "raw"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 3:
            raise InvalidArgumentError("volume values must be 3-D")
        if not self.voxel_width > 0:
            raise InvalidArgumentError("voxel_width must be > 0")
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True, eq=False)
class Sinogram:
    """Per-view projections stacked as (view, detector row, detector column)."""

    values: np.ndarray
    angles: np.ndarray
    pixel_pitch: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        angles = np.asarray(self.angles, dtype=np.float64)
        if values.ndim != 3:
            raise InvalidArgumentError("sinogram values must be (view, row, col)")
        if values.shape[0] != angles.size:
            raise InvalidArgumentError(
                f"view count {values.shape[0]} != angle count {angles.size}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("sinogram contains non-finite values")
        if not self.pixel_pitch > 0:
            raise InvalidArgumentError("pixel_pitch must be > 0")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "angles", angles)
