"""Command-line entry point: ``vtpsim {run,sweep,render,check}``.

Exit codes: 0 success, 1 invalid track (check), 2 mission not completed,
64 usage error, 65 configuration error, 66 unreadable input file.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from pathlib import Path

from . import __version__, imaging
from .errors import ConfigError, TrackError
from .sim import SimConfig, run, sweep_alpha, sweep_csv, with_overrides, write_run
from .world import load_track, render_frame

EX_OK = 0
EX_INVALID = 1
EX_MISSION = 2
EX_USAGE = 64
EX_CONFIG = 65
EX_NOINPUT = 66


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _default_out() -> Path:
    return Path(os.environ.get("VTP_OUT", "vtp_out"))


def _parse_set(items) -> dict[str, str]:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def _config(args) -> SimConfig:
    track = load_track(args.track)
    return with_overrides(SimConfig(track=track), _parse_set(args.set))


def _write_meta(out: Path, argv) -> None:
    meta = {
        "argv": list(argv),
        "version": __version__,
        "started": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    (out / "run_meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")


def _cmd_run(args, argv) -> int:
    cfg = _config(args)
    out = Path(args.out) if args.out else _default_out()
    out.mkdir(parents=True, exist_ok=True)
    log, metrics = run(cfg, dump_dir=out / "frames" if args.dump_frames else None)
    write_run(out, log, metrics)
    _write_meta(out, argv)
    print(f"outcome={metrics.outcome} mission_time={metrics.mission_time:.3f} "
          f"mean_path_error={metrics.mean_path_error:.4f} "
          f"landing_offset={metrics.landing_offset:.4f}")
    return EX_OK if metrics.outcome == "Done" else EX_MISSION


def _cmd_sweep(args, argv) -> int:
    cfg = _config(args)
    alphas = _floats(args.alpha)
    if not alphas:
        raise UsageError("--alpha needs at least one value")
    entries = sweep_alpha(cfg, alphas, jobs=args.jobs)
    text = sweep_csv(entries)
    out = Path(args.out) if args.out else _default_out()
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(text, encoding="utf-8")
    _write_meta(out, argv)
    sys.stdout.write(text)
    return EX_OK if all(e.metrics and e.metrics.outcome == "Done" for e in entries) else EX_MISSION


def _cmd_render(args, argv) -> int:
    cfg = _config(args)
    x, y, z = _floats(args.at, 3)
    if not z > 0:
        raise ConfigError("render altitude must be > 0")
    frame = render_frame(cfg.track, (x, y), z, cfg.camera)
    path = Path(args.out) if args.out else _default_out() / "frame.ppm"
    path.parent.mkdir(parents=True, exist_ok=True)
    imaging.write_ppm(path, frame)
    print(path)
    return EX_OK


def _cmd_check(args, argv) -> int:
    try:
        track = load_track(args.track)
    except TrackError as exc:
        print(f"invalid: {exc}")
        return EX_INVALID
    print(f"ok: {len(track.segments)} segments, length {track.length:.3f} m, "
          f"marker at ({track.marker_center[0]:g}, {track.marker_center[1]:g}) "
          f"diameter {track.marker_diameter:g} m, path width {track.path_width:g} m")
    return EX_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vtpsim", description="Vision-based path following simulator.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def common(sp, out_help):
        sp.add_argument("--track", required=True, help="track file or shipped track name")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="config override, e.g. planner.alpha=0.004 (repeatable)")
        sp.add_argument("--out", help=out_help)

    sp = sub.add_parser("run", help="simulate one mission")
    common(sp, "output directory (default $VTP_OUT or ./vtp_out)")
    sp.add_argument("--dump-frames", action="store_true",
                    help="write per-frame PPM/PGM debug images under OUT/frames")
    sp.set_defaults(func=_cmd_run)

    sp = sub.add_parser("sweep", help="run one mission per alpha value")
    common(sp, "output directory (default $VTP_OUT or ./vtp_out)")
    sp.add_argument("--alpha", required=True, help="comma-separated alpha values")
    sp.add_argument("--jobs", type=int, default=1, help="parallel runs")
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("render", help="render one camera frame")
    common(sp, "output PPM file (default $VTP_OUT/frame.ppm)")
    sp.add_argument("--at", required=True, help="drone pose x,y,z in metres")
    sp.set_defaults(func=_cmd_render)

    sp = sub.add_parser("check", help="validate a track file")
    sp.add_argument("--track", required=True, help="track file or shipped track name")
    sp.set_defaults(func=_cmd_check)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, argv)
    except UsageError as exc:
        print(f"vtpsim: error: {exc}", file=sys.stderr)
        return EX_USAGE
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"vtpsim: cannot read {exc.filename or exc}", file=sys.stderr)
        return EX_NOINPUT
    except (ConfigError, TrackError) as exc:
        print(f"vtpsim: configuration error: {exc}", file=sys.stderr)
        return EX_CONFIG


if __name__ == "__main__":
    sys.exit(main())
