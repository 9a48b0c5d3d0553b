"""Bundled molecular fixtures: FCIDUMP files plus reference energies.

Files live in ``cdprep/fixtures`` and were produced by the committed
``scripts/generate_fixtures.py``.  Every load verifies the file's sha256
against the bundled manifest so silent fixture corruption cannot skew
results.
"""

from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path

from .fermion import MolecularIntegrals, parse_fcidump

__all__ = [
    "fixture_dir",
    "list_fixtures",
    "load_fixture",
    "reference_energies",
    "FixtureIntegrityError",
]


class FixtureIntegrityError(RuntimeError):
    """A bundled data file does not match its recorded checksum."""


def fixture_dir() -> Path:
    return Path(resources.files("cdprep") / "fixtures")


def _manifest(directory: Path) -> dict:
    path = directory / "manifest.json"
    if not path.is_file():
        raise FileNotFoundError(f"fixture manifest missing: {path}")
    return json.loads(path.read_text())


def list_fixtures(directory: Path | None = None) -> list[str]:
    directory = directory or fixture_dir()
    names = [
        name[: -len(".fcidump")]
        for name in _manifest(directory)["files"]
        if name.endswith(".fcidump")
    ]
    return sorted(names)


def _verified_bytes(directory: Path, filename: str) -> bytes:
    manifest = _manifest(directory)
    entry = manifest["files"].get(filename)
    if entry is None:
        raise KeyError(f"{filename} is not a bundled fixture")
    path = directory / filename
    data = path.read_bytes()
    digest = hashlib.sha256(data).hexdigest()
    if digest != entry["sha256"]:
        raise FixtureIntegrityError(
            f"checksum mismatch for {filename}: "
            f"expected {entry['sha256']}, got {digest}"
        )
    return data


def load_fixture(
    name: str, directory: Path | None = None
) -> MolecularIntegrals:
    """Load a bundled FCIDUMP by name (e.g. ``h2_0.7414``)."""
    directory = directory or fixture_dir()
    filename = name if name.endswith(".fcidump") else f"{name}.fcidump"
    manifest = _manifest(directory)
    entry = manifest["files"].get(filename)
    if entry is None:
        known = ", ".join(list_fixtures(directory))
        raise KeyError(f"unknown fixture {name!r}; bundled: {known}")
    data = _verified_bytes(directory, filename)
    return parse_fcidump(
        data.decode(), bond_distance=entry.get("bond_distance_angstrom")
    )


def reference_energies(directory: Path | None = None) -> dict:
    directory = directory or fixture_dir()
    data = _verified_bytes(directory, "reference_energies.json")
    return json.loads(data.decode())
