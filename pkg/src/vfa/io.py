"""Self-describing CSV output and plain PGM images."""
from __future__ import annotations

import csv
import io
import json
import os
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import FormatError


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def csv_text(columns: Sequence[str], rows: Iterable[Sequence], meta: Mapping) -> str:
    """CSV with ``#`` header lines carrying ``meta`` (one ``# key: value`` per entry)."""
    buf = io.StringIO()
    for key, value in meta.items():
        text = value if isinstance(value, str) else json.dumps(value, sort_keys=True, default=str)
        buf.write(f"# {key}: {text}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, columns, rows, meta) -> None:
    text = csv_text(columns, rows, meta)
    if path in (None, "-"):
        print(text, end="")
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def read_csv(path):
    """Return ``(meta, columns, rows)``; values are left as strings."""
    meta, body = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(":")
                meta[key.strip()] = value.strip()
            else:
                body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        raise FormatError("CSV has no column header")
    return meta, rows[0], rows[1:]


def csv_body(text: str) -> str:
    """The non-comment part of a CSV document."""
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))


def companion_path(path, suffix: str):
    if path in (None, "-"):
        return None
    root, ext = os.path.splitext(str(path))
    return f"{root}_{suffix}{ext or '.csv'}"


# PGM ---------------------------------------------------------------------------


def write_pgm(path, image, binary: bool = True, maxval: int = 255) -> None:
    """Write a grayscale image with values in [0, 1] as P5 (binary) or P2 (text)."""
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise FormatError("PGM images are 2-D")
    q = np.rint(np.clip(img, 0.0, 1.0) * maxval).astype(int)
    h, w = q.shape
    with open(path, "wb") as fh:
        if binary:
            fh.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
            fh.write(q.astype(">u2" if maxval > 255 else "u1").tobytes())
        else:
            fh.write(f"P2\n{w} {h}\n{maxval}\n".encode("ascii"))
            for row in q:
                fh.write((" ".join(str(v) for v in row) + "\n").encode("ascii"))


def _tokens(data: bytes, count: int, start: int = 0):
    # header tokens, skipping '#' comments; returns tokens and offset after the last one
    out, i = [], start
    while len(out) < count:
        while i < len(data) and data[i:i + 1].isspace():
            i += 1
        if i >= len(data):
            raise FormatError("truncated PGM header")
        if data[i:i + 1] == b"#":
            while i < len(data) and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < len(data) and not data[j:j + 1].isspace():
            j += 1
        out.append(data[i:j])
        i = j
    return out, i


def read_pgm(path) -> np.ndarray:
    """Read a P2 or P5 file into a float array scaled to [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    (magic, w, h, maxval), off = _tokens(data, 4)
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise FormatError("bad PGM header") from exc
    if not 0 < maxval < 65536:
        raise FormatError("bad PGM maxval")
    if magic == b"P5":
        dtype = ">u2" if maxval > 255 else "u1"
        size = np.dtype(dtype).itemsize * w * h
        raw = data[off + 1: off + 1 + size]
        if len(raw) != size:
            raise FormatError("truncated PGM raster")
        vals = np.frombuffer(raw, dtype=dtype).astype(float)
    elif magic == b"P2":
        toks, _ = _tokens(data, w * h, off)
        vals = np.array([int(t) for t in toks], dtype=float)
    else:
        raise FormatError(f"unsupported PGM magic {magic!r}")
    return vals.reshape(h, w) / maxval
