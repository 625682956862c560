import hashlib
import json
import logging
from pathlib import Path

import numpy as np


def stable_hash(text: str, length: int = 12) -> str:
    """Process-independent short hash (``hash()`` is salted per interpreter)."""
    return hashlib.blake2b(text.encode("utf-8"), digest_size=16).hexdigest()[:length]


def named_rng(seed: int, stream: str) -> np.random.Generator:
    """An independent generator per named stream, reproducible from ``seed``."""
    entropy = int(stable_hash(stream, 16), 16)
    return np.random.default_rng(np.random.SeedSequence([seed, entropy]))


def save_report(name: str, report: dict, out_path: str | None = None, base_dir: str = "runs") -> Path:
    """Write a JSON run report to ``out_path`` or ``<base_dir>/<name>/report.json``."""
    if out_path:
        file_path = Path(out_path)
    else:
        folder_name = name.lower().replace(" ", "-")
        file_path = Path(base_dir) / folder_name / "report.json"
    file_path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(file_path, "w", encoding="utf-8") as f:
            json.dump(report, f, indent=2)
        logging.info(f"Saved run report to: {file_path}")
    except OSError as e:
        logging.error(f"Failed to save run report to {file_path}: {e}")
        raise
    return file_path
