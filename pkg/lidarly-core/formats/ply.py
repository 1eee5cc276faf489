"""
PLY point clouds (ascii, binary_little_endian or binary_big_endian).

write_ply emits float32 x/y/z; read_ply accepts any scalar vertex properties as long as x, y and z are among them.
"""

from pathlib import Path
from typing import List, Literal, Tuple, Union

import numpy as np

from utils.errors import FormatError

PathLike = Union[str, Path]

SCALAR_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}

BYTE_ORDER = {"binary_little_endian": "<", "binary_big_endian": ">"}


def write_ply(path: PathLike, points: np.ndarray, encoding: Literal["ascii", "binary"] = "ascii", comment: str = "") -> None:
    points = np.asarray(points, dtype=np.float32).reshape(-1, 3)
    fmt = "ascii" if encoding == "ascii" else "binary_little_endian"
    header = ["ply", f"format {fmt} 1.0"]
    if comment:
        header.append(f"comment {comment}")
    header += [f"element vertex {len(points)}", "property float x", "property float y", "property float z", "end_header"]
    with open(path, "wb") as handle:
        handle.write(("\n".join(header) + "\n").encode("ascii"))
        if encoding == "ascii":
            for p in points:
                handle.write((" ".join(np.format_float_scientific(c, unique=True) for c in p) + "\n").encode("ascii"))
        else:
            handle.write(points.astype("<f4").tobytes())


def _parse_header(path: PathLike, lines: List[str]) -> Tuple[str, int, List[Tuple[str, str]]]:
    """(format, vertex count, [(property name, numpy type code)]) for the leading vertex element"""
    fmt, count, properties, current = None, None, [], None
    for line in lines[1:]:
        parts = line.split()
        if not parts or parts[0] in ("comment", "obj_info"):
            continue
        if parts[0] == "format" and len(parts) >= 2:
            fmt = parts[1]
        elif parts[0] == "element" and len(parts) == 3:
            current = parts[1]
            if current == "vertex":
                if count is not None or properties:
                    raise FormatError(f"{path}: vertex element declared twice")
                if not parts[2].isdigit():
                    raise FormatError(f"{path}: bad vertex count {parts[2]!r}")
                count = int(parts[2])
            elif count is None:
                raise FormatError(f"{path}: element {current!r} precedes the vertex element")
        elif parts[0] == "property" and current == "vertex":
            if parts[1] == "list" or len(parts) != 3:
                raise FormatError(f"{path}: unsupported vertex property {line.strip()!r}")
            if parts[1] not in SCALAR_TYPES:
                raise FormatError(f"{path}: unknown property type {parts[1]!r}")
            properties.append((parts[2], SCALAR_TYPES[parts[1]]))
        elif parts[0] != "property":
            raise FormatError(f"{path}: unexpected header line {line.strip()!r}")
    if count is None or fmt not in ("ascii", *BYTE_ORDER):
        raise FormatError(f"{path}: unsupported PLY layout")
    names = [name for name, _ in properties]
    if not {"x", "y", "z"} <= set(names) or len(set(names)) != len(names):
        raise FormatError(f"{path}: vertex needs distinct x, y and z properties, got {names}")
    return fmt, count, properties


def read_ply(path: PathLike) -> np.ndarray:
    """(N, 3) x/y/z in the declared precision; extra vertex properties and trailing elements are skipped"""
    data = Path(path).read_bytes()
    end = data.find(b"end_header\n")
    if not data.startswith(b"ply\n") or end < 0:
        raise FormatError(f"{path}: not a PLY file")
    try:
        header = data[:end].decode("ascii").splitlines()
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: header is not ASCII") from exc
    fmt, count, properties = _parse_header(path, header)
    body = data[end + len(b"end_header\n"):]
    names = [name for name, _ in properties]
    columns = [names.index(axis) for axis in ("x", "y", "z")]
    out_dtype = np.result_type(*(np.dtype(properties[c][1]) for c in columns), np.float32)

    if fmt == "ascii":
        rows = [line.split() for line in body.decode("ascii", errors="replace").splitlines() if line.strip()]
        if len(rows) < count or any(len(r) != len(properties) for r in rows[:count]):
            raise FormatError(f"{path}: expected {count} vertices with {len(properties)} values each")
        try:
            table = np.array(rows[:count], dtype=np.float64).reshape(count, len(properties))
        except ValueError as exc:
            raise FormatError(f"{path}: bad vertex value ({exc})") from exc
        return table[:, columns].astype(out_dtype)

    record = np.dtype([(name, BYTE_ORDER[fmt] + code) for name, code in properties])
    if len(body) < count * record.itemsize:
        raise FormatError(f"{path}: expected {count} vertices")
    table = np.frombuffer(body, dtype=record, count=count)
    return np.stack([table[axis].astype(out_dtype) for axis in ("x", "y", "z")], axis=1).reshape(count, 3)
