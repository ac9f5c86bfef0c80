"""
Packing robot commands for the radio
====================================

Four robots share one 25-byte payload: a header byte with a presence mask
followed by six bytes per robot. Eight robots at 60 Hz fit in about
31 kbit/s of air time.
"""

from sslkit import RobotCommand, bandwidth_estimate, decode, encode, packets_for
from sslkit.radio import KickMode, unpack_packets

commands = {
    0: RobotCommand(vx=1500, vy=-200, w=120),
    1: RobotCommand(),
    3: RobotCommand(vx=-800, dribble=3),
    5: RobotCommand(vx=2000, kick_mode=KickMode.CHIP, kick_power=90),
}

for packet in packets_for(commands):
    wire = encode(packet)
    print(f"group {packet.group} mask {packet.mask:04b} robots {packet.robot_ids}: "
          f"{len(wire)} B  {wire.hex(' ')}")
    assert decode(wire) == packet

received = unpack_packets(decode(encode(p)) for p in packets_for(commands))
print("round trip intact:", received == commands)

for n in (1, 4, 6, 8, 16):
    print(f"{n:2d} robots at 60 Hz: {bandwidth_estimate(n, 60) / 1000:.2f} kbit/s")
