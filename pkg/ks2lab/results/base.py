"""Persistence and JSON output shared by all report classes."""
import json
import warnings
from pathlib import Path

import dill


class ReportMixin:
    """Adds save, to_json and JSON rendering to a class that implements to_dict."""

    def to_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self, path: str | Path | None = None) -> str:
        """Render the report as deterministic JSON and optionally write it to path."""
        text = json.dumps(self.to_dict(), sort_keys=True, indent=2)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    def save(self, path: str):
        """Save the report to a file.

        Load again by

        ```python
        from ks2lab.utils import load_results

        report = load_results(path)
        ```

        Args:
            path (str): The path to save the report to.
        """
        try:
            with open(path, "wb") as f:
                dill.dump(self, f)
        except (ValueError, OSError):
            warnings.warn("Could not save report. Please make sure that the path is valid.")
