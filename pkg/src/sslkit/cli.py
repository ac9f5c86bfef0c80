"""Command-line front end: ``sslkit <subcommand> ...``.

Subcommands write files (or stdout) and exit nonzero with a message naming
the offending field when an input is malformed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import socket
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import radio
from .geom import Vec2
from .interception import (InterceptError, intercept, intercept_heatmap, heatmap_pgm_bytes,
                           write_heatmap_csv)
from .simworld import PassScenario, SimConfig, load_sim_config, sweep
from .tactics import BallTarget, assign_roles, cost_matrix
from .tracker import Tracker, TrackerConfig, TrackerError, object_to_record, parse_camera, parse_frame


class CliError(Exception):
    pass


def _load_config(path: str | None) -> tuple[SimConfig, PassScenario]:
    if path is None:
        return SimConfig(), PassScenario()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        return load_sim_config(text)
    except ValueError as exc:
        raise CliError(f"config {path}: {exc}") from None


def _load_json(path: str) -> object:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path} is not valid JSON: {exc}") from None


def _vec(obj: dict, key: str, where: str, default=None) -> Vec2:
    if key not in obj:
        if default is not None:
            return Vec2(*default)
        raise CliError(f"{where}: missing field '{key}'")
    val = obj[key]
    try:
        x, y = val
        return Vec2(float(x), float(y))
    except (TypeError, ValueError):
        raise CliError(f"{where}: field '{key}' must be [x, y], got {val!r}") from None


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 120x90, got {text!r}") from None
    return nx, ny


# -- subcommands ---------------------------------------------------------------

def cmd_heatmap(args) -> int:
    cfg, scn = _load_config(args.config)
    fld = cfg.field
    # 'corner' puts the origin at a field corner, as in the figure captions
    scale = 10.0 if args.units == "cm" else 1.0
    bx, by = args.ball_x * scale, args.ball_y * scale
    if args.origin == "corner":
        bx -= fld.half_length
        by -= fld.half_width
    if args.ball_speed is not None:
        vel = Vec2(args.ball_speed, 0.0).rotate(math.radians(args.ball_dir))
    else:
        vel = Vec2(args.ball_vx, args.ball_vy)
    if not fld.contains(Vec2(bx, by)):
        raise CliError(f"ball-x/ball-y ({args.ball_x} {args.units}, {args.ball_y} {args.units}) "
                       "is outside the field")
    nx, ny = args.grid
    try:
        hm = intercept_heatmap(Vec2(bx, by), vel, nx, ny, cfg.limits, cfg.ball_model,
                               scn.intercept_params, fld)
    except (ValueError, InterceptError) as exc:
        raise CliError(str(exc)) from None
    out = Path(args.out)
    written = []
    if args.format in ("csv", "both"):
        path = out.with_suffix(".csv")
        write_heatmap_csv(hm, path)
        written.append(path)
    if args.format in ("pgm", "both"):
        path = out.with_suffix(".pgm")
        path.write_bytes(heatmap_pgm_bytes(hm))
        written.append(path)
    for p in written:
        print(p)
    return 0


def cmd_intercept(args) -> int:
    cfg, scn = _load_config(args.config)
    data = _load_json(args.scenario)
    if not isinstance(data, dict):
        raise CliError(f"{args.scenario}: expected a JSON object")
    ball = data.get("ball")
    robot = data.get("robot")
    if not isinstance(ball, dict):
        raise CliError(f"{args.scenario}: missing object 'ball'")
    if not isinstance(robot, dict):
        raise CliError(f"{args.scenario}: missing object 'robot'")
    try:
        res = intercept(_vec(ball, "pos", "ball"), _vec(ball, "vel", "ball", (0, 0)),
                        _vec(robot, "pos", "robot"), _vec(robot, "vel", "robot", (0, 0)),
                        cfg.limits, cfg.ball_model, scn.intercept_params, cfg.field)
    except (ValueError, InterceptError) as exc:
        raise CliError(str(exc)) from None
    print(json.dumps({"p_best": list(res.p_best), "t_best": res.t_best,
                      "kind": res.kind.value, "steps": res.steps}))
    return 0


def cmd_passrate(args) -> int:
    cfg, scn = _load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    try:
        rows = sweep(cfg, args.sweep, args.values, args.trials, scn)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([args.sweep, "success_rate"])
        for v, rate in rows:
            w.writerow([v, f"{rate:.4f}"])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def _iter_frames_file(path: str):
    try:
        fh = open(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield parse_frame(line)
            except TrackerError as exc:
                raise CliError(f"{path}:{lineno}: {exc}") from None


def _iter_frames_udp(port: int, max_frames: int | None, timeout: float):
    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    sock.bind(("127.0.0.1", port))
    sock.settimeout(timeout)
    n = 0
    try:
        while max_frames is None or n < max_frames:
            try:
                data, _ = sock.recvfrom(65535)
            except socket.timeout:
                return
            try:
                yield parse_frame(data)
            except TrackerError as exc:
                print(f"udp:{port}: dropped datagram: {exc}", file=sys.stderr)
                continue
            n += 1
    finally:
        sock.close()


def cmd_track(args) -> int:
    cameras = []
    if args.cameras:
        data = _load_json(args.cameras)
        if not isinstance(data, list):
            raise CliError(f"{args.cameras}: expected a JSON list of cameras")
        try:
            cameras = [parse_camera(c) for c in data]
        except (TrackerError, ValueError, TypeError) as exc:
            raise CliError(f"{args.cameras}: {exc}") from None
    tracker = Tracker(TrackerConfig(gate_radius=args.gate), cameras=cameras)
    frames = (_iter_frames_file(args.frames) if args.frames
              else _iter_frames_udp(args.udp, args.max_frames, args.udp_timeout))
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for frame in frames:
            try:
                world = tracker.ingest_frame(frame)
            except TrackerError as exc:
                raise CliError(str(exc)) from None
            objs = [object_to_record(o) for o in world if o.valid or args.all]
            out.write(json.dumps({"t": frame.t, "camera_id": frame.camera_id,
                                  "objects": objs}) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _command_from(obj: dict, where: str) -> tuple[int, radio.RobotCommand]:
    if "id" not in obj:
        raise CliError(f"{where}: missing field 'id'")
    fields = {}
    for name in ("vx", "vy", "w", "dribble", "kick_power"):
        if name in obj:
            fields[name] = obj[name]
    mode = obj.get("kick_mode", "flat")
    if isinstance(mode, str):
        try:
            mode = radio.KickMode[mode.upper()]
        except KeyError:
            raise CliError(f"{where}: field 'kick_mode' must be flat or chip") from None
    fields["kick_mode"] = mode
    return int(obj["id"]), radio.RobotCommand(**fields)


def cmd_codec(args) -> int:
    if args.action == "encode":
        data = _load_json(args.infile)
        robots = data.get("robots") if isinstance(data, dict) else None
        if not isinstance(robots, list):
            raise CliError(f"{args.infile}: missing list 'robots'")
        cmds = dict(_command_from(r, f"{args.infile}: robots[{i}]") for i, r in enumerate(robots))
        try:
            packets = radio.packets_for(cmds)
            lines = [radio.encode(p).hex(" ") for p in packets]
        except radio.RangeError as exc:
            raise CliError(f"{args.infile}: {exc}") from None
        text = "\n".join(lines) + "\n"
    else:
        try:
            raw = Path(args.infile).read_text()
        except OSError as exc:
            raise CliError(f"cannot read {args.infile}: {exc.strerror}") from None
        robots = []
        for lineno, line in enumerate(raw.splitlines(), 1):
            if not line.strip():
                continue
            try:
                pkt = radio.decode(bytes.fromhex(line))
            except ValueError as exc:
                raise CliError(f"{args.infile}:{lineno}: {exc}") from None
            for rid, c in zip(pkt.robot_ids, pkt.commands):
                robots.append({"id": rid, "vx": c.vx, "vy": c.vy, "w": c.w,
                               "dribble": c.dribble,
                               "kick_mode": radio.KickMode(c.kick_mode).name.lower(),
                               "kick_power": c.kick_power})
        text = json.dumps({"robots": robots}, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_assign(args) -> int:
    cfg, scn = _load_config(args.config)
    data = _load_json(args.scenario)
    if not isinstance(data, dict):
        raise CliError(f"{args.scenario}: expected a JSON object")
    robots = [(_vec(r, "pos", f"robots[{i}]"), _vec(r, "vel", f"robots[{i}]", (0, 0)))
              for i, r in enumerate(data.get("robots", []))]
    targets = []
    for i, t in enumerate(data.get("targets", [])):
        if "ball" in t:
            b = t["ball"]
            targets.append(BallTarget(_vec(b, "pos", f"targets[{i}].ball"),
                                      _vec(b, "vel", f"targets[{i}].ball", (0, 0))))
        else:
            targets.append(_vec(t, "point", f"targets[{i}]"))
    mode = data.get("cost", "time")
    try:
        match = assign_roles(robots, targets, cfg.limits, cfg.ball_model,
                             scn.intercept_params, cfg.field, mode)
        cost = cost_matrix(robots, targets, cfg.limits, cfg.ball_model,
                           scn.intercept_params, cfg.field, mode)
    except (ValueError, InterceptError) as exc:
        raise CliError(f"{args.scenario}: {exc}") from None
    print("robot\ttarget\tcost")
    for r, t in enumerate(match):
        print(f"{r}\t{t}\t{cost[r, t]:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sslkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    h = sub.add_parser("heatmap", help="interception-time heat map for a resting robot")
    h.add_argument("--ball-x", type=float, required=True, help="ball x [--units]")
    h.add_argument("--ball-y", type=float, required=True, help="ball y [--units]")
    h.add_argument("--units", choices=("cm", "mm"), default="cm", help="unit of --ball-x/--ball-y")
    h.add_argument("--ball-vx", type=float, default=0.0, help="ball velocity x [mm/s]")
    h.add_argument("--ball-vy", type=float, default=0.0, help="ball velocity y [mm/s]")
    h.add_argument("--ball-speed", type=float, help="ball speed [mm/s]; overrides --ball-vx/vy")
    h.add_argument("--ball-dir", type=float, default=0.0,
                   help="direction for --ball-speed [deg from +x]")
    h.add_argument("--origin", choices=("corner", "center"), default="corner",
                   help="frame of --ball-x/--ball-y (default: field corner)")
    h.add_argument("--grid", type=_parse_grid, default=(120, 90), help="cells, e.g. 120x90")
    h.add_argument("--format", choices=("csv", "pgm", "both"), default="both")
    h.add_argument("--out", default="heatmap", help="output path prefix")
    h.add_argument("--config")
    h.set_defaults(func=cmd_heatmap)

    i = sub.add_parser("intercept", help="single interception prediction")
    i.add_argument("--scenario", required=True, help="JSON: {ball: {pos, vel}, robot: {pos, vel}} [mm, mm/s]")
    i.add_argument("--config")
    i.set_defaults(func=cmd_intercept)

    r = sub.add_parser("passrate", help="pass success rate vs. vision noise")
    r.add_argument("--sweep", required=True, choices=("sigma_xy", "sigma_theta", "loss"),
                   help="sigma_xy [mm], sigma_theta [rad] or loss [probability]")
    r.add_argument("--values", type=float, nargs="+", required=True)
    r.add_argument("--trials", type=int, default=100)
    r.add_argument("--seed", type=int)
    r.add_argument("--out", help="CSV path (default stdout)")
    r.add_argument("--config")
    r.set_defaults(func=cmd_passrate)

    t = sub.add_parser("track", help="filter detection records into a world-state stream")
    src = t.add_mutually_exclusive_group(required=True)
    src.add_argument("--frames", help="file with one JSON detection record per line")
    src.add_argument("--udp", type=int, help="UDP port to receive records on")
    t.add_argument("--cameras", help="JSON list of {id, center [mm, mm], coverage_radius [mm]}")
    t.add_argument("--gate", type=float, default=300.0, help="association gate [mm]")
    t.add_argument("--all", action="store_true", help="also emit invalid tracks")
    t.add_argument("--max-frames", type=int, help="stop after this many UDP records")
    t.add_argument("--udp-timeout", type=float, default=5.0, help="idle timeout [s]")
    t.add_argument("--out", help="output path (default stdout)")
    t.set_defaults(func=cmd_track)

    c = sub.add_parser("codec", help="radio packet encoder/decoder")
    c.add_argument("action", choices=("encode", "decode"))
    c.add_argument("--in", dest="infile", required=True,
                   help="command JSON (encode) or hex lines (decode)")
    c.add_argument("--out")
    c.set_defaults(func=cmd_codec)

    a = sub.add_parser("assign", help="time-cost role assignment")
    a.add_argument("--scenario", required=True)
    a.add_argument("--config")
    a.set_defaults(func=cmd_assign)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"sslkit {args.command}: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
