"""Compact cluster snapshots.

Binary layout, little-endian::

    magic   4 bytes  b"WFPS"
    version u8       1
    d       u8
    count   u32      number of absorbed edges
    keys    count unsigned LEB128 varints, zig-zag deltas of canonical edge keys
    times   count f64 absorption times

Edges appear in absorption order. The CSV export has one row per absorbed edge,
``step,time,vx,vy,...``, naming the endpoint that edge brought into the
cluster, or its lower endpoint when both were already absorbed.
"""
import csv
import os
import struct
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from app.core.errors import ConfigError
from app.lattice import LatticeCodec, Vertex

MAGIC = b"WFPS"
VERSION = 1
AXIS_NAMES = ("vx", "vy", "vz", "vw")


def _zigzag(n: int) -> int:
    return n * 2 if n >= 0 else -n * 2 - 1


def _unzigzag(n: int) -> int:
    return n >> 1 if n % 2 == 0 else -((n + 1) >> 1)


def encode_snapshot(d: int, edge_keys: Sequence[int], times: Sequence[float]) -> bytes:
    out = bytearray(MAGIC)
    out += struct.pack("<BBI", VERSION, d, len(edge_keys))
    previous = 0
    for key in edge_keys:
        n = _zigzag(key - previous)
        previous = key
        while True:
            byte = n & 0x7F
            n >>= 7
            if n:
                out.append(byte | 0x80)
            else:
                out.append(byte)
                break
    out += struct.pack(f"<{len(times)}d", *times)
    return bytes(out)


def decode_snapshot(data: bytes) -> Tuple[int, List[int], List[float]]:
    if data[:4] != MAGIC:
        raise ConfigError("not a cluster snapshot (bad magic)")
    version, d, count = struct.unpack_from("<BBI", data, 4)
    if version != VERSION:
        raise ConfigError(f"unsupported snapshot version {version}")
    pos = 10
    keys = []
    previous = 0
    for _ in range(count):
        n = shift = 0
        while True:
            byte = data[pos]
            pos += 1
            n |= (byte & 0x7F) << shift
            shift += 7
            if not byte & 0x80:
                break
        previous += _unzigzag(n)
        keys.append(previous)
    times = list(struct.unpack_from(f"<{count}d", data, pos))
    return d, keys, times


def replay_vertices(codec: LatticeCodec, edge_keys: Sequence[int]) -> List[Tuple[int, int]]:
    """(edge index, vertex key) for the origin and every vertex an edge brought in, in order.

    The origin is reported with index -1. An edge that closes a cycle adds nothing.
    """
    absorbed = {codec.origin_key}
    out = [(-1, codec.origin_key)]
    for i, key in enumerate(edge_keys):
        lo, hi = codec.edge_endpoint_keys(key)
        if hi not in absorbed:
            absorbed.add(hi)
            out.append((i, hi))
        elif lo not in absorbed:
            absorbed.add(lo)
            out.append((i, lo))
    return out


@dataclass(frozen=True)
class Snapshot:
    step: int
    time: float
    data: bytes = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.data[5]

    def decode(self) -> Tuple[int, List[int], List[float]]:
        return decode_snapshot(self.data)

    def vertices(self) -> List[Vertex]:
        """Absorbed vertices in absorption order, origin first."""
        d, keys, _ = self.decode()
        codec = LatticeCodec(d)
        return [codec.vertex_of(v) for _, v in replay_vertices(codec, keys)]

    def csv_rows(self) -> List[list]:
        d, keys, times = self.decode()
        codec = LatticeCodec(d)
        absorbed = {codec.origin_key}
        rows = []
        for step, (key, t) in enumerate(zip(keys, times), start=1):
            lo, hi = codec.edge_endpoint_keys(key)
            new = hi if hi not in absorbed else lo
            absorbed.add(new)
            rows.append([step, t, *codec.vertex_of(new)])
        return rows


def write_snapshot_binary(path: str, snapshot: Snapshot) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as f:
        f.write(snapshot.data)
    return path


def read_snapshot_binary(path: str, step: int = -1) -> Snapshot:
    with open(path, "rb") as f:
        data = f.read()
    _, keys, times = decode_snapshot(data)
    return Snapshot(step=step if step >= 0 else len(keys), time=times[-1] if times else 0.0, data=data)


def write_snapshot_csv(path: str, snapshot: Snapshot) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    d = snapshot.dimension
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["step", "time", *AXIS_NAMES[:d]])
        for step, t, *coords in snapshot.csv_rows():
            writer.writerow([step, repr(t), *coords])
    return path


def read_snapshot_csv(path: str) -> List[list]:
    """Rows of a snapshot CSV as ``[step, time, *coords]`` with their original types."""
    if not os.path.exists(path):
        raise ConfigError(f"snapshot file not found: {path}", category="config.not_found")
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header[:2] != ["step", "time"]:
            raise ConfigError(f"{path}: not a snapshot CSV")
        return [[int(r[0]), float(r[1]), *(int(c) for c in r[2:])] for r in reader]
