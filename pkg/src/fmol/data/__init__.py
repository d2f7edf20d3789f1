"""Bundled data: the demo scorefile."""

from importlib import resources
from pathlib import Path


def demo_score_path() -> Path:
    with resources.as_file(resources.files(__package__) / "demo.fmol") as p:
        return Path(p)


def demo_score_text() -> str:
    return (resources.files(__package__) / "demo.fmol").read_text()
