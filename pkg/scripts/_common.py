"""Shared helpers for the experiment scripts."""
from __future__ import annotations

from pathlib import Path

from qrmsg.harness import emit_csv, emit_plotdata, load_config

CONFIGS = Path(__file__).resolve().parents[1] / "src" / "qrmsg" / "data" / "configs"


def config(name: str, **overrides):
    return load_config(CONFIGS / f"{name}.cfg", **overrides)


def save(result, out_dir: Path, stem: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    emit_csv(result.points, out_dir / f"{stem}.csv")
    emit_plotdata(result.points, out_dir / f"{stem}.dat", result.config.smoothing_window)


def seeds_arg(text: str) -> list:
    return [int(t) for t in text.replace(",", " ").split()]
