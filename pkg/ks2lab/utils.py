"""Contains several utility functions for the ks2lab package."""
import json
from pathlib import Path

import dill


def load_results(path: str):
    """Load a report saved with its save() method."""
    with open(path, "rb") as f:
        return dill.load(f)


def write_json(data: dict, path: str | Path) -> Path:
    """Write data as deterministic JSON: sorted keys, indent 2 and a final newline.

    Args:
        data: A JSON-ready dict.
        path: Target file; parent directories are created.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")
    return path


def read_json(path: str | Path) -> dict:
    """Read a JSON file, for example a kernel spec."""
    with open(path) as f:
        return json.load(f)
