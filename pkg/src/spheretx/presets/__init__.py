"""Checked-in experiment files that regenerate each figure."""

from __future__ import annotations

from importlib import resources
from typing import List, Tuple

from ..config import ExperimentConfig, parse_config

FIGURES = ("fig1", "fig2", "fig3", "fig4")


def preset_files(figure: str) -> List[str]:
    if figure not in FIGURES:
        raise KeyError(f"unknown preset {figure!r}; choose from {', '.join(FIGURES)}")
    folder = resources.files(__name__).joinpath(figure)
    return sorted(p.name for p in folder.iterdir() if p.name.endswith(".ini"))


def load_preset(figure: str) -> List[Tuple[str, ExperimentConfig]]:
    """``(stem, config)`` for every file of a preset, in name order."""
    out = []
    folder = resources.files(__name__).joinpath(figure)
    for name in preset_files(figure):
        text = folder.joinpath(name).read_text(encoding="utf-8")
        out.append((name[:-4], parse_config(text, f"{figure}/{name}")))
    return out
