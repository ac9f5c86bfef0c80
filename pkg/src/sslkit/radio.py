"""Compact radio control protocol.

Wire format (all multi-bit fields big-endian, most significant bit first)::

    header   1 byte   type:2 | group:2 | mask:4
    command  6 bytes  vx:13 | vy:13 | w:12 | dribble:2 | kick_mode:1 | kick_power:7

``vx``/``vy`` are mm/s and ``w`` is centiradians/s, all two's complement.
Mask bit ``i`` set means robot ``group * 4 + i`` has a command; commands
follow in ascending slot order. A full packet (four commands) is exactly
25 bytes, the payload size of one nRF24L01+ frame.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping

HEADER_BYTES = 1
COMMAND_BYTES = 6
MAX_ROBOTS_PER_PACKET = 4
PAYLOAD_BYTES = 25
AIRFRAME_BYTES = 5 + 2 + PAYLOAD_BYTES  # address + CRC + payload

# (name, width, signed); order is wire order
_LAYOUT = (
    ("vx", 13, True),
    ("vy", 13, True),
    ("w", 12, True),
    ("dribble", 2, False),
    ("kick_mode", 1, False),
    ("kick_power", 7, False),
)
assert sum(w for _, w, _ in _LAYOUT) == 8 * COMMAND_BYTES


class RangeError(ValueError):
    """A field value does not fit its wire width."""


class FramingError(ValueError):
    """A byte string is not a well-formed packet."""


class KickMode(enum.IntEnum):
    FLAT = 0
    CHIP = 1


class PacketType(enum.IntEnum):
    MOTION = 0  # 1-3 reserved


@dataclass(frozen=True)
class RobotCommand:
    vx: int = 0
    vy: int = 0
    w: int = 0
    dribble: int = 0
    kick_mode: int = KickMode.FLAT
    kick_power: int = 0


@dataclass(frozen=True)
class ControlPacket:
    packet_type: int = PacketType.MOTION
    group: int = 0
    mask: int = 0
    commands: tuple[RobotCommand, ...] = ()

    @property
    def robot_ids(self) -> list[int]:
        return [self.group * 4 + i for i in range(4) if self.mask >> i & 1]


def _limits(width: int, signed: bool) -> tuple[int, int]:
    # signed fields are symmetric: the most negative pattern is not a valid command
    if signed:
        hi = (1 << (width - 1)) - 1
        return -hi, hi
    return 0, (1 << width) - 1


# (name, width, signed, lo, hi, bit mask) with limits precomputed
_FIELDS = tuple((name, width, signed, *_limits(width, signed), (1 << width) - 1)
                for name, width, signed in _LAYOUT)


def _check_range(name: str, value, lo: int, hi: int) -> int:
    if type(value) is not int:
        if isinstance(value, bool) or int(value) != value:
            raise RangeError(f"{name}={value!r} is not an integer")
        value = int(value)
    if not lo <= value <= hi:
        raise RangeError(f"{name}={value} outside [{lo}, {hi}]")
    return value


def encode_command(cmd: RobotCommand) -> bytes:
    word = 0
    for name, width, _, lo, hi, mask in _FIELDS:
        v = _check_range(name, getattr(cmd, name), lo, hi)
        word = (word << width) | (v & mask)
    return word.to_bytes(COMMAND_BYTES, "big")


def decode_command(block: bytes) -> RobotCommand:
    if len(block) != COMMAND_BYTES:
        raise FramingError(f"command block is {len(block)} bytes, expected {COMMAND_BYTES}")
    word = int.from_bytes(block, "big")
    values = []
    shift = 8 * COMMAND_BYTES
    for _, width, signed, _, _, mask in _FIELDS:
        shift -= width
        v = (word >> shift) & mask
        if signed and v >> (width - 1):
            v -= 1 << width
        values.append(v)
    return RobotCommand(*values)


def encode(p: ControlPacket) -> bytes:
    _check_range("packet_type", p.packet_type, 0, 3)
    _check_range("group", p.group, 0, 3)
    _check_range("mask", p.mask, 0, 15)
    n = bin(p.mask).count("1")
    if len(p.commands) != n:
        raise RangeError(f"mask {p.mask:04b} needs {n} commands, got {len(p.commands)}")
    out = bytearray([(p.packet_type << 6) | (p.group << 4) | p.mask])
    for i, cmd in enumerate(p.commands):
        try:
            out += encode_command(cmd)
        except RangeError as exc:
            raise RangeError(f"command {i}: {exc}") from None
    return bytes(out)


def decode(data: bytes) -> ControlPacket:
    if len(data) < HEADER_BYTES:
        raise FramingError("empty packet")
    header = data[0]
    mask = header & 0x0F
    n = bin(mask).count("1")
    expected = HEADER_BYTES + COMMAND_BYTES * n
    if len(data) != expected:
        raise FramingError(
            f"packet is {len(data)} bytes but header mask {mask:04b} implies {expected}")
    cmds = tuple(decode_command(data[1 + COMMAND_BYTES * i:1 + COMMAND_BYTES * (i + 1)])
                 for i in range(n))
    return ControlPacket(header >> 6, (header >> 4) & 0x3, mask, cmds)


def packets_for(commands: Mapping[int, RobotCommand],
                packet_type: int = PacketType.MOTION) -> list[ControlPacket]:
    """Group per-robot commands (ids 0-15) into as few packets as possible."""
    groups: dict[int, dict[int, RobotCommand]] = {}
    for rid, cmd in commands.items():
        if not 0 <= rid < 16:
            raise RangeError(f"robot id {rid} outside [0, 15]")
        groups.setdefault(rid // 4, {})[rid % 4] = cmd
    out = []
    for g in sorted(groups):
        slots = groups[g]
        mask = sum(1 << s for s in slots)
        out.append(ControlPacket(packet_type, g, mask, tuple(slots[s] for s in sorted(slots))))
    return out


def unpack_packets(packets) -> dict[int, RobotCommand]:
    out = {}
    for p in packets:
        for rid, cmd in zip(p.robot_ids, p.commands):
            out[rid] = cmd
    return out


def bandwidth_estimate(n_robots: int, control_hz: float) -> int | float:
    """Minimum over-the-air bit rate for controlling ``n_robots`` robots.

    One 32-byte airframe carries up to four robots per control tick.
    """
    if n_robots < 0:
        raise ValueError("n_robots must be non-negative")
    if not control_hz > 0:
        raise ValueError("control_hz must be positive")
    packets = math.ceil(n_robots / MAX_ROBOTS_PER_PACKET)
    return packets * AIRFRAME_BYTES * 8 * control_hz
