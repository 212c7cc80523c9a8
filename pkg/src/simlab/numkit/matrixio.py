"""Plain-text matrix format shared by every tool in the package.

Layout: the first line holds ``rows cols``; each following line holds one
row of ``cols`` tokens ``re:im`` separated by single spaces. UTF-8, LF.
"""
import math
import re
from pathlib import Path

import numpy as np

from ..errors import NonFinite, ParseError

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TOKEN = re.compile(rf"^({_NUM}):({_NUM})$")


def format_real(x):
    """Shortest round-tripping decimal text for a finite float."""
    x = float(x)
    if not math.isfinite(x):
        raise NonFinite(f"cannot serialize non-finite value {x!r}")
    text = repr(x)
    if text.endswith(".0"):
        text = text[:-2]
    return text


def format_token(z):
    return f"{format_real(z.real)}:{format_real(z.imag)}"


def dumps_matrix(T):
    T = np.asarray(T, dtype=complex)
    if T.ndim != 2:
        raise ValueError("only 2-D arrays can be serialized")
    lines = [f"{T.shape[0]} {T.shape[1]}"]
    for row in T:
        lines.append(" ".join(format_token(z) for z in row))
    return "\n".join(lines) + "\n"


def _parse_lines(lines, first_line=1):
    if not lines:
        raise ParseError("empty input", line=first_line)
    head = lines[0].split()
    if len(head) != 2 or not all(h.isdigit() for h in head):
        raise ParseError("header must be 'rows cols'", line=first_line)
    rows, cols = int(head[0]), int(head[1])
    if rows < 1 or cols < 1:
        raise ParseError("rows and cols must be positive", line=first_line)
    if len(lines) - 1 < rows:
        raise ParseError(f"expected {rows} rows, found {len(lines) - 1}",
                         line=first_line + len(lines))
    out = np.empty((rows, cols), dtype=complex)
    for i in range(rows):
        lineno = first_line + 1 + i
        tokens = lines[1 + i].split(" ")
        if len(tokens) != cols:
            raise ParseError(f"expected {cols} tokens, found {len(tokens)}", line=lineno)
        for j, tok in enumerate(tokens):
            m = _TOKEN.match(tok)
            if m is None:
                raise ParseError(f"malformed token {tok!r}", line=lineno)
            out[i, j] = complex(float(m.group(1)), float(m.group(2)))
    return out, 1 + rows


def loads_matrix(text):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines = lines[:-1]
    T, used = _parse_lines(lines)
    if used != len(lines):
        raise ParseError("trailing content after matrix", line=used + 1)
    return T


def read_matrix(path):
    return loads_matrix(Path(path).read_text(encoding="utf-8"))


def write_matrix(path, T):
    Path(path).write_text(dumps_matrix(T), encoding="utf-8", newline="\n")


def matrix_io_roundtrip(path):
    """Read ``path`` and check that writing it back reproduces every token."""
    text = Path(path).read_text(encoding="utf-8")
    T = loads_matrix(text)
    again = loads_matrix(dumps_matrix(T))
    if not np.array_equal(T, again):
        raise ParseError("matrix does not survive a write/read cycle")
    return T


_HEADER = re.compile(r"^kappa=(\S+) rate=(\S+) residual=(\S+)$")


def dumps_certificate(cert):
    head = (f"kappa={format_real(cert.kappa)} rate={format_real(cert.rate)} "
            f"residual={format_real(cert.residual)}")
    return head + "\n" + dumps_matrix(cert.P)


def loads_certificate(text):
    from ..simcert.types import MetricCertificate

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines = lines[:-1]
    if not lines:
        raise ParseError("empty input", line=1)
    m = _HEADER.match(lines[0])
    if m is None:
        raise ParseError("header must be 'kappa=<float> rate=<float> residual=<float>'", line=1)
    try:
        kappa, rate, residual = (float(g) for g in m.groups())
    except ValueError as exc:
        raise ParseError(str(exc), line=1) from None
    P, used = _parse_lines(lines[1:], first_line=2)
    if used != len(lines) - 1:
        raise ParseError("trailing content after certificate", line=used + 2)
    return MetricCertificate(P=P, kappa=kappa, rate=rate, residual=residual)
