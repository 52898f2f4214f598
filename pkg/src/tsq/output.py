"""Snapshot CSV, PPM/PGM heatmaps and the plain-text run report.

Everything written here is a pure function of its inputs, so identical runs
give byte-identical files.
"""
from __future__ import annotations

import math
import os
from pathlib import Path

import numpy as np

from .field import ComplexField


def _fmt(v: float, digits: int) -> str:
    return f"{v:.{digits}g}"


def write_snapshot_csv(path, field: ComplexField, stride: int = 1) -> None:
    """Header ``x,y,re_rho,im_rho``; rows y-outer, x-inner, 9 significant digits."""
    g = field.grid
    vals = _plane(field)[::stride, ::stride]
    xs = g.x[::stride]
    ys = g.y[::stride] if g.dims == 2 else np.zeros(1)
    lines = ["x,y,re_rho,im_rho"]
    for j, y in enumerate(ys):
        ystr = _fmt(float(y), 9)
        row = vals[j]
        for i, x in enumerate(xs):
            v = row[i]
            lines.append(f"{_fmt(float(x), 9)},{ystr},{_fmt(float(v.real), 9)},{_fmt(float(v.imag), 9)}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def _plane(field: ComplexField) -> np.ndarray:
    # 1D fields are written as a single row at y = 0
    return field.values if field.grid.dims == 2 else field.values[None, :]


def diverging_rgb(v: np.ndarray) -> np.ndarray:
    """Map values in [-1, 1] to white-centred red (positive) / blue (negative)."""
    v = np.clip(v, -1.0, 1.0)
    rgb = np.empty(v.shape + (3,), dtype=np.uint8)
    pos = v >= 0
    fade_pos = np.rint(255 * (1 - v)).astype(np.uint8)
    fade_neg = np.rint(255 * (1 + v)).astype(np.uint8)
    rgb[..., 0] = np.where(pos, 255, fade_neg)
    rgb[..., 1] = np.where(pos, fade_pos, fade_neg)
    rgb[..., 2] = np.where(pos, fade_pos, 255)
    return rgb


def write_ppm(path, rgb: np.ndarray) -> None:
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())


def write_pgm(path, gray: np.ndarray) -> None:
    h, w = gray.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(gray, dtype=np.uint8).tobytes())


def _scale(arrays) -> float:
    m = max(float(np.max(np.abs(a))) for a in arrays)
    return m if m > 0 else 1.0


def write_heatmaps(outdir: Path, stem_for, snapshots, stride: int = 1) -> list:
    """Three images per snapshot (re, im diverging PPM; abs grayscale PGM).

    Each channel shares one scale across the whole sequence.  Images are
    flipped vertically so +y points up.
    """
    cut = [_plane(f)[::stride, ::stride] for _, f in snapshots]
    scales = {
        "re": _scale([c.real for c in cut]),
        "im": _scale([c.imag for c in cut]),
        "abs": _scale([np.abs(c) for c in cut]),
    }
    files = []
    for idx, c in enumerate(cut):
        stem = stem_for(idx)
        for chan, data in (("re", c.real), ("im", c.imag)):
            p = outdir / f"{stem}_{chan}.ppm"
            write_ppm(p, diverging_rgb(data[::-1] / scales[chan]))
            files.append(p)
        gray = np.rint(255 * np.clip(np.abs(c[::-1]) / scales["abs"], 0, 1)).astype(np.uint8)
        p = outdir / f"{stem}_abs.pgm"
        write_pgm(p, gray)
        files.append(p)
    return files


def format_report(fields: dict) -> str:
    """``key = value`` lines, floats to 12 significant digits, LF endings."""
    lines = []
    for key, val in fields.items():
        if val is None:
            continue
        if isinstance(val, dict):
            for sub, v in val.items():
                lines.append(f"{key}.{sub} = {_value(v)}")
        elif isinstance(val, (list, tuple)):
            lines.append(f"{key} = {','.join(_value(v) for v in val)}")
        else:
            lines.append(f"{key} = {_value(val)}")
    return "\n".join(lines) + "\n"


def _value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            raise ValueError(f"non-finite report value {v}")
        return _fmt(float(v), 12)
    if isinstance(v, os.PathLike):
        return os.fspath(v)
    return str(v)


REPORT_NAME = "report.txt"


def default_stride(grid) -> int:
    """Thin large grids so emitted files stay near 256 nodes per side."""
    return max(1, math.ceil(max(grid.shape) / 256))


def emit_outputs(report, snapshots, cfg, output_dir=None) -> list:
    """Write snapshot CSVs and heatmaps (per the emit flags) plus the report.

    Snapshot ``i`` is stored as ``rho_<iii>``; its time is listed in the
    report under ``snapshot_times``.  Returns the written paths and records
    their names in ``report.files``.
    """
    outdir = Path(cfg.run.output_dir if output_dir is None else output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    if snapshots:
        stride = cfg.run.emit_stride or default_stride(snapshots[0][1].grid)

        def stem(i):
            return f"rho_{i:03d}"

        if cfg.run.emit_csv:
            for i, (_, f) in enumerate(snapshots):
                p = outdir / f"{stem(i)}.csv"
                write_snapshot_csv(p, f, stride)
                written.append(p)
        if cfg.run.emit_images:
            written.extend(write_heatmaps(outdir, stem, snapshots, stride))
    report_path = outdir / REPORT_NAME
    report.files = [p.name for p in written] + [REPORT_NAME]
    with open(report_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_report(report.report_fields()))
    written.append(report_path)
    return written
