"""Batch figure renderer: tcdark-plot <preset|specfile> <csv> -o <image>."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import PlotError, PlotSpec, PRESETS, preset_spec, render


def _parse_specfile(path: Path, csv, out) -> PlotSpec:
    """Flat key=value spec: columns (comma list), logy, xlabel, ylabel, title."""
    fields = {}
    for ln, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PlotError(f"{path}:{ln}: expected key = value")
        key, val = (p.strip() for p in line.split("=", 1))
        fields[key] = val
    if "columns" not in fields:
        raise PlotError(f"{path}: specfile needs a 'columns' entry")
    kwargs = dict(
        csv=Path(csv),
        columns=[c.strip() for c in fields["columns"].split(",")],
        out=Path(out),
    )
    if "x" in fields:
        kwargs["x"] = fields["x"]
    for key in ("xlabel", "ylabel", "title"):
        if key in fields:
            kwargs[key] = fields[key]
    if "logy" in fields:
        kwargs["logy"] = fields["logy"].lower() in ("true", "1", "yes")
    return PlotSpec(**kwargs)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tcdark-plot",
        description="Render figures from tcdark CSV outputs",
    )
    parser.add_argument("preset",
                        help="preset name (%s) or a specfile path"
                             % ", ".join(PRESETS))
    parser.add_argument("csv", help="input CSV from the engine")
    parser.add_argument("-o", "--out", required=True,
                        help="output image (.svg or .png)")
    args = parser.parse_args(argv)
    try:
        if args.preset in PRESETS:
            spec = preset_spec(args.preset, args.csv, args.out)
        elif Path(args.preset).exists():
            spec = _parse_specfile(Path(args.preset), args.csv, args.out)
        else:
            raise PlotError(
                f"unknown preset {args.preset!r} and no such specfile; "
                "presets: " + ", ".join(PRESETS)
            )
        out = render(spec)
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
