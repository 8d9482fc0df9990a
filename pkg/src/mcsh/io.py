"""Snapshot, manifest, and CSV persistence.

Snapshot layout: one file per state, a single-line JSON header (grid,
time, component names, dtype "f64-le", row-major layout) followed by a
newline and the concatenated raw little-endian float64 component
arrays.  Complex fields are stored as explicit _re/_im component pairs.
The format is language-neutral and bit-exact: write/read round-trips
reproduce every sample.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np
import scipy

from .errors import ConfigurationError
from .model import FieldState
from .spectral import Grid2D, as_field

SNAPSHOT_FORMAT = "mcsh-snapshot-1"

# canonical component order; complex fields appear as _re/_im pairs
COMPONENTS = (
    "A0", "A1", "A2", "phi_re", "phi_im", "N",
    "dA0", "dA1", "dA2", "dphi_re", "dphi_im", "dN",
)


def _component_arrays(state: FieldState) -> dict[str, np.ndarray]:
    phi = state.phi.physical
    dphi = state.dphi.physical
    return {
        "A0": state.A0.physical.real,
        "A1": state.A1.physical.real,
        "A2": state.A2.physical.real,
        "phi_re": phi.real,
        "phi_im": phi.imag,
        "N": state.N.physical.real,
        "dA0": state.dA0.physical.real,
        "dA1": state.dA1.physical.real,
        "dA2": state.dA2.physical.real,
        "dphi_re": dphi.real,
        "dphi_im": dphi.imag,
        "dN": state.dN.physical.real,
    }


def write_snapshot(path, state: FieldState) -> None:
    grid = state.grid
    header = {
        "format": SNAPSHOT_FORMAT,
        "grid": {"n": grid.n, "period": grid.period},
        "t": state.t,
        "components": list(COMPONENTS),
        "dtype": "f64-le",
        "layout": "row-major",
    }
    arrays = _component_arrays(state)
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for name in COMPONENTS:
            fh.write(np.ascontiguousarray(arrays[name], dtype="<f8").tobytes())


def read_snapshot(path) -> FieldState:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"{path}: malformed snapshot header: {exc}") from exc
    if header.get("format") != SNAPSHOT_FORMAT:
        raise ConfigurationError(
            f"{path}: unknown snapshot format {header.get('format')!r}"
        )
    if header.get("dtype") != "f64-le" or header.get("layout") != "row-major":
        raise ConfigurationError(f"{path}: unsupported dtype/layout in header")
    names = header["components"]
    if names != list(COMPONENTS):
        raise ConfigurationError(f"{path}: unexpected component list {names}")
    n = int(header["grid"]["n"])
    grid = Grid2D(n, float(header["grid"]["period"]))
    expect = len(COMPONENTS) * n * n * 8
    if len(payload) != expect:
        raise ConfigurationError(
            f"{path}: payload holds {len(payload)} bytes, expected {expect}"
        )
    flat = np.frombuffer(payload, dtype="<f8").reshape(len(COMPONENTS), n, n)
    comp = {name: flat[i] for i, name in enumerate(COMPONENTS)}

    def real(name):
        return as_field(grid, comp[name].astype(float), real=True)

    def cplx(name):
        return as_field(grid, comp[f"{name}_re"] + 1j * comp[f"{name}_im"], real=False)

    return FieldState(
        A0=real("A0"), A1=real("A1"), A2=real("A2"), phi=cplx("phi"), N=real("N"),
        dA0=real("dA0"), dA1=real("dA1"), dA2=real("dA2"), dphi=cplx("dphi"),
        dN=real("dN"), t=float(header["t"]),
    )


def config_digest(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def write_manifest(path, config: dict, raw_config: bytes, extra: dict | None = None) -> None:
    """Reproducibility record: the resolved config, the hash of the
    config file as given, and the library versions that produced the
    run.  Identical manifest plus identical versions reproduce outputs
    bit-identically (all randomness is seeded from the config)."""
    import mcsh

    manifest = {
        "config_sha256": config_digest(raw_config),
        "config": config,
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "mcsh": mcsh.__version__,
        },
    }
    if extra:
        manifest.update(extra)
    Path(path).write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def read_diagnostics_csv(path) -> list[dict]:
    """Parse a diagnostics CSV back into one dict of floats per row."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        {k: float(v) for k, v in row.items() if v not in (None, "")} for row in rows
    ]
