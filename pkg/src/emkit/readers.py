"""Input file parsers. Every failure is a ParseError carrying path, line and column."""

from __future__ import annotations

import csv
import hashlib
import io
import re
from pathlib import Path

import numpy as np

from .abo import BloodTypeCounts
from .errors import EmError, ParseError
from .ibd import SibPairObservation
from .motif import ALPHABET

ABO_HEADER = ["t_A", "t_B", "t_AB", "t_O"]
IBD_HEADER = [
    "father_a1", "father_a2", "mother_a1", "mother_a2",
    "sib1_a1", "sib1_a2", "sib2_a1", "sib2_a2",
]


def read_text(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path=str(path)) from exc


def digest(*paths):
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return "sha256:" + h.hexdigest()


def _rows(path):
    text = read_text(path)
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        yield lineno, [cell.strip() for cell in row]


def _int_field(cell, path, line, col, minimum=0):
    try:
        value = int(cell)
    except ValueError:
        raise ParseError(f"expected an integer, got {cell!r}", path, line, col) from None
    if value < minimum:
        raise ParseError(f"expected an integer >= {minimum}, got {value}", path, line, col)
    return value


def _float_field(cell, path, line, col):
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"expected a number, got {cell!r}", path, line, col) from None


def _check_header(row, expected, path, line):
    if row != expected:
        raise ParseError(f"expected header {','.join(expected)!r}, got {','.join(row)!r}", path, line, 1)


def read_abo_counts(path) -> BloodTypeCounts:
    rows = list(_rows(path))
    if not rows:
        raise ParseError("empty file", path, 1, 1)
    _check_header(rows[0][1], ABO_HEADER, path, rows[0][0])
    if len(rows) != 2:
        line = rows[2][0] if len(rows) > 2 else rows[0][0]
        raise ParseError(f"expected exactly one data row, got {len(rows) - 1}", path, line, 1)
    line, row = rows[1]
    if len(row) != 4:
        raise ParseError(f"expected 4 fields, got {len(row)}", path, line, min(len(row), 4) + 1)
    values = [_int_field(c, path, line, i + 1) for i, c in enumerate(row)]
    try:
        return BloodTypeCounts(*values)
    except EmError as exc:
        raise type(exc)(f"{path}:{line}: {exc}") from exc


def read_sib_pairs(path):
    """Return ``(observations, line_numbers)``. Compatibility is checked by the caller."""
    rows = list(_rows(path))
    if not rows:
        raise ParseError("empty file", path, 1, 1)
    _check_header(rows[0][1], IBD_HEADER, path, rows[0][0])
    observations, lines = [], []
    for line, row in rows[1:]:
        if len(row) != 8:
            raise ParseError(f"expected 8 fields, got {len(row)}", path, line, min(len(row), 8) + 1)
        a = [_int_field(c, path, line, i + 1, minimum=1) for i, c in enumerate(row)]
        observations.append(SibPairObservation((a[0], a[1]), (a[2], a[3]), (a[4], a[5]), (a[6], a[7])))
        lines.append(line)
    if not observations:
        raise ParseError("no sib pair rows", path, rows[0][0] + 1, 1)
    return observations, lines


def read_sequences(path):
    """Plain one-sequence-per-line or FASTA (records may span several lines)."""
    text = read_text(path)
    lines = text.splitlines()
    fasta = any(l.startswith(">") for l in lines)
    sequences = []
    current = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if line.startswith(">"):
            if current is not None and current:
                sequences.append(current)
            current = ""
            continue
        if not line:
            continue
        upper = line.upper()
        for col, ch in enumerate(upper, start=1):
            if ch not in ALPHABET:
                raise ParseError(f"invalid nucleotide {ch!r}", path, lineno, col)
        if fasta:
            if current is None:
                raise ParseError("sequence data before first FASTA header", path, lineno, 1)
            current += upper
        else:
            sequences.append(upper)
    if fasta and current:
        sequences.append(current)
    if not sequences:
        raise ParseError("no sequences found", path, 1, 1)
    return sequences


def _is_numeric_row(row):
    try:
        [float(c) for c in row]
    except ValueError:
        return False
    return True


def read_kernel(path) -> np.ndarray:
    rows = list(_rows(path))
    if not rows:
        raise ParseError("empty kernel file", path, 1, 1)
    if not _is_numeric_row(rows[0][1]):
        rows = rows[1:]
    if not rows:
        raise ParseError("kernel file has a header but no rows", path, 2, 1)
    width = len(rows[0][1])
    matrix = []
    for line, row in rows:
        if len(row) != width:
            raise ParseError(f"expected {width} columns, got {len(row)}", path, line, min(len(row), width) + 1)
        matrix.append([_float_field(c, path, line, i + 1) for i, c in enumerate(row)])
    return np.array(matrix, dtype=float)


_TOKEN = re.compile(r"[^\s,]+")


def read_port_counts(path):
    """Counts file: ``P_0`` followed by ``P_1..P_m``, separated by commas or whitespace.

    A first line made only of names such as ``P_0,P_1,...`` is treated as a header.
    """
    text = read_text(path)
    tokens = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        found = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(line)]
        if not found:
            continue
        if not tokens and all(re.fullmatch(r"[A-Za-z_][\w]*", t) for t, _ in found):
            continue
        tokens.extend((t, lineno, col) for t, col in found)
    if len(tokens) < 2:
        raise ParseError("need P_0 followed by at least one port count", path, 1, 1)
    values = [_int_field(t, path, line, col) for t, line, col in tokens]
    if values[0] < 1:
        _, line, col = tokens[0]
        raise ParseError("P_0 must be positive", path, line, col)
    return values[0], np.array(values[1:], dtype=float)
