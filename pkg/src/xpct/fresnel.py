"""Discrete free-space propagation of complex fields.

The propagator is a unit-modulus multiplier in DFT space,
exp(-i*pi*lambda*R*(mu^2 + nu^2)), applied with an unnormalized forward DFT
and a 1/(n_u*n_v) inverse so that a round trip is the identity.  Because the
kernel is pure phase the operator is unitary and its adjoint equals its
inverse (the conjugate kernel).
"""

import functools

import numpy as np

from .core import frequency_grid
from .errors import InvalidArgumentError


@functools.lru_cache(maxsize=128)
def _kernel(wavelength, distance, pixel_pitch, n_u, n_v):
    mu = np.fft.fftfreq(n_u, d=pixel_pitch)
    nu = np.fft.fftfreq(n_v, d=pixel_pitch)
    phase = -np.pi * wavelength * distance * (
        mu[:, np.newaxis] ** 2 + nu[np.newaxis, :] ** 2
    )
    kernel = np.exp(1j * phase)
    kernel.flags.writeable = False
    return kernel


def propagator_kernel(geometry, n_u, n_v):
    """Fresnel kernel H(p, q) on an n_u x n_v grid at the detector pitch.

    The dims are the padded dims used for simulation/retrieval; the kernel is
    cached per (wavelength, distance, pitch, dims) and returned read-only.
    """
    # frequency_grid also validates the dims
    frequency_grid(geometry, n_u, n_v)
    return _kernel(geometry.wavelength, geometry.distance,
                   geometry.pixel_pitch, n_u, n_v)


def _check_dims(field, kernel):
    field = np.asarray(field)
    if field.shape != kernel.shape:
        raise InvalidArgumentError(
            f"field shape {field.shape} does not match kernel {kernel.shape}"
        )
    return field


def propagate(field, kernel):
    """Apply the propagator: IDFT(DFT(field) * H)."""
    field = _check_dims(field, kernel)
    return np.fft.ifft2(np.fft.fft2(field) * kernel)


def adjoint_propagate(field, kernel):
    """Apply the adjoint (= inverse, since H is unitary): conjugate kernel."""
    field = _check_dims(field, kernel)
    return np.fft.ifft2(np.fft.fft2(field) * np.conj(kernel))
