"""Dataset directories: a meta.json manifest plus raw float32 array files.

Arrays are stored little-endian float32 in C order, one file per array, so
parallel writers never share a file.  Computation happens in float64; the
narrower dtype on disk matches detector dynamic range.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import AcquisitionGeometry
from .errors import DatasetError, InvalidArgumentError

FORMAT_VERSION = 1
STAGES = ("raw", "normalized", "transmission", "phase", "volume")
_STACK_STAGES = ("raw", "normalized", "transmission", "phase")


@dataclass(frozen=True)
class ArrayEntry:
    dtype: str
    shape: tuple
    file: str
    stage: str


def _geometry_to_dict(geometry):
    return {
        "wavelength_m": geometry.wavelength,
        "distance_m": geometry.distance,
        "pixel_pitch_m": geometry.pixel_pitch,
        "n_u": geometry.n_u,
        "n_v": geometry.n_v,
        "angles_rad": [float(a) for a in geometry.angles],
    }


def _geometry_from_dict(d):
    try:
        return AcquisitionGeometry(
            wavelength=float(d["wavelength_m"]),
            distance=float(d["distance_m"]),
            pixel_pitch=float(d["pixel_pitch_m"]),
            n_u=int(d["n_u"]),
            n_v=int(d["n_v"]),
            angles=np.asarray(d["angles_rad"], dtype=np.float64),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"invalid geometry in manifest: {exc}") from exc


def save_dataset(path, geometry, arrays, provenance):
    """Write arrays and their manifest to a dataset directory.

    arrays maps name -> (ndarray, stage).  Returns the manifest dict as
    written to meta.json.
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    inventory = {}
    for name, (values, stage) in arrays.items():
        if stage not in STAGES:
            raise InvalidArgumentError(f"unknown stage {stage!r} for array {name!r}")
        values = np.ascontiguousarray(values, dtype="<f4")
        filename = f"{name}.f32"
        try:
            (path / filename).write_bytes(values.tobytes())
        except OSError as exc:
            raise DatasetError(f"failed writing {path / filename}: {exc}") from exc
        inventory[name] = {
            "dtype": "float32-le",
            "shape": list(values.shape),
            "file": filename,
            "stage": stage,
        }
    manifest = {
        "format_version": FORMAT_VERSION,
        "geometry": _geometry_to_dict(geometry),
        "arrays": inventory,
        "provenance": provenance,
    }
    try:
        (path / "meta.json").write_text(json.dumps(manifest, indent=2))
    except OSError as exc:
        raise DatasetError(f"failed writing {path / 'meta.json'}: {exc}") from exc
    return manifest


class Dataset:
    """A validated dataset directory with lazily readable arrays."""

    def __init__(self, path, geometry, entries, provenance):
        self.path = Path(path)
        self.geometry = geometry
        self.entries = entries
        self.provenance = provenance

    @property
    def names(self):
        return tuple(self.entries)

    def stage_of(self, name):
        return self.entries[name].stage

    def names_with_stage(self, stage):
        return tuple(n for n, e in self.entries.items() if e.stage == stage)

    def load(self, name):
        """Read one array from disk as float64."""
        if name not in self.entries:
            raise DatasetError(f"dataset {self.path} has no array {name!r}")
        entry = self.entries[name]
        data = np.fromfile(self.path / entry.file, dtype="<f4")
        return data.reshape(entry.shape).astype(np.float64)


def load_dataset(path):
    """Open a dataset directory, validating the manifest and file sizes."""
    path = Path(path)
    meta_path = path / "meta.json"
    if not meta_path.is_file():
        raise DatasetError(f"no manifest found at {meta_path}")
    try:
        manifest = json.loads(meta_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetError(f"cannot read manifest {meta_path}: {exc}") from exc

    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise DatasetError(
            f"unknown format_version {version!r} in {meta_path} "
            f"(expected {FORMAT_VERSION})"
        )
    geometry = _geometry_from_dict(manifest.get("geometry", {}))

    entries = {}
    for name, spec in manifest.get("arrays", {}).items():
        try:
            entry = ArrayEntry(
                dtype=spec["dtype"],
                shape=tuple(int(n) for n in spec["shape"]),
                file=str(spec["file"]),
                stage=str(spec["stage"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"malformed entry for array {name!r}: {exc}") from exc
        if entry.dtype != "float32-le":
            raise DatasetError(f"array {name!r} has unsupported dtype {entry.dtype!r}")
        if entry.stage not in STAGES:
            raise DatasetError(f"array {name!r} has unknown stage {entry.stage!r}")
        file_path = path / entry.file
        if not file_path.is_file():
            raise DatasetError(f"array file missing: {file_path}")
        expected = 4 * int(np.prod(entry.shape, dtype=np.int64))
        actual = file_path.stat().st_size
        if actual != expected:
            raise DatasetError(
                f"array file {file_path} has {actual} bytes, expected {expected} "
                f"for shape {entry.shape}"
            )
        if entry.stage in _STACK_STAGES:
            frame = entry.shape[-2:] if len(entry.shape) >= 2 else ()
            if frame != (geometry.n_u, geometry.n_v):
                raise DatasetError(
                    f"array {name!r} frame shape {frame} does not match the "
                    f"detector grid ({geometry.n_u}, {geometry.n_v})"
                )
            if len(entry.shape) == 3 and entry.shape[0] != geometry.n_views:
                raise DatasetError(
                    f"array {name!r} has {entry.shape[0]} frames for "
                    f"{geometry.n_views} view angles"
                )
        entries[name] = entry

    return Dataset(path, geometry, entries, manifest.get("provenance", {}))


def export_image(array, path, window=None):
    """Write a 2-D array as a 16-bit binary PGM (P5, maxval 65535).

    Values are mapped linearly from [lo, hi] to [0, 65535] with clamping and
    round-half-up.  window=None auto-windows to (min, max); a constant image
    then collapses to all zeros.
    """
    array = np.asarray(array, dtype=np.float64)
    if array.ndim != 2:
        raise InvalidArgumentError("export_image expects a 2-D array")
    if window is None:
        lo, hi = float(array.min()), float(array.max())
        if hi <= lo:
            scaled = np.zeros(array.shape, dtype=np.uint16)
            _write_pgm(path, scaled)
            return
    else:
        lo, hi = float(window[0]), float(window[1])
        if lo >= hi:
            raise InvalidArgumentError(f"window lo must be < hi, got ({lo}, {hi})")
    mapped = (array - lo) / (hi - lo) * 65535.0
    scaled = np.floor(np.clip(mapped, 0.0, 65535.0) + 0.5).astype(np.uint16)
    _write_pgm(path, scaled)


def _write_pgm(path, pixels):
    height, width = pixels.shape
    header = f"P5\n{width} {height}\n65535\n".encode("ascii")
    try:
        Path(path).write_bytes(header + pixels.astype(">u2").tobytes())
    except OSError as exc:
        raise DatasetError(f"failed writing image {path}: {exc}") from exc
