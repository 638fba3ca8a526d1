"""Plain-text portfolio instance files.

Format (UTF-8, whitespace separated, ``#`` starts a comment)::

    portfolio 1
    n <int> alpha <float> rho <float>
    <mean: n floats>
    <u: n floats>
    <row 0 of Q: 1 float>
    <row 1 of Q: 2 floats>
    ...
    <row n-1 of Q: n floats>

Only the lower triangle of ``Q`` is stored. Floats are written with
``repr`` so that a write/read round trip is exact.
"""

from __future__ import annotations

import os
from typing import List, Tuple, Union

import numpy as np

from .portfolio import PortfolioInstance

FORMAT_VERSION = 1

PathLike = Union[str, os.PathLike]


class InstanceFormatError(ValueError):
    def __init__(self, path, line: int, column: int, message: str):
        self.path, self.line, self.column = path, line, column
        super().__init__(f"{path}:{line}:{column}: {message}")


def _logical_lines(text: str) -> List[Tuple[int, List[Tuple[int, str]]]]:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        tokens, col = [], 0
        for tok in body.split():
            col = body.index(tok, col)
            tokens.append((col + 1, tok))
            col += len(tok)
        if tokens:
            lines.append((lineno, tokens))
    return lines


def read_portfolio_file(path: PathLike) -> PortfolioInstance:
    with open(path, encoding="utf-8") as fh:
        lines = _logical_lines(fh.read())

    def fail(line, col, msg):
        raise InstanceFormatError(path, line, col, msg)

    def number(lineno, col, tok, kind=float):
        try:
            return kind(tok)
        except ValueError:
            fail(lineno, col, f"expected {kind.__name__}, got {tok!r}")

    def floats(entry, count, what):
        lineno, tokens = entry
        if len(tokens) != count:
            col = tokens[min(count, len(tokens) - 1)][0]
            fail(lineno, col, f"dimension mismatch: {what} has {len(tokens)} entries, expected {count}")
        return np.array([number(lineno, c, t) for c, t in tokens])

    if not lines:
        fail(1, 1, "empty file")
    lineno, tokens = lines[0]
    if [t for _, t in tokens[:1]] != ["portfolio"] or len(tokens) != 2:
        fail(lineno, 1, "malformed header: expected 'portfolio <version>'")
    version = number(lineno, tokens[1][0], tokens[1][1], int)
    if version != FORMAT_VERSION:
        fail(lineno, tokens[1][0], f"unsupported format version {version}")

    if len(lines) < 2:
        fail(lineno + 1, 1, "missing size line")
    lineno, tokens = lines[1]
    keys = [t for _, t in tokens[0::2]]
    if keys != ["n", "alpha", "rho"] or len(tokens) != 6:
        fail(lineno, 1, "malformed size line: expected 'n <int> alpha <float> rho <float>'")
    n = number(lineno, tokens[1][0], tokens[1][1], int)
    if n < 1:
        fail(lineno, tokens[1][0], "n must be positive")
    alpha = number(lineno, tokens[3][0], tokens[3][1])
    rho = number(lineno, tokens[5][0], tokens[5][1])

    expected = 4 + n
    if len(lines) < expected:
        last = lines[-1][0]
        fail(last + 1, 1, f"dimension mismatch: expected {expected} data lines, found {len(lines)}")
    if len(lines) > expected:
        fail(lines[expected][0], 1, "unexpected trailing data")
    mean = floats(lines[2], n, "mean")
    u = floats(lines[3], n, "u")
    Q = np.zeros((n, n))
    for i in range(n):
        Q[i, : i + 1] = floats(lines[4 + i], i + 1, f"row {i} of Q")
    Q = np.tril(Q) + np.tril(Q, -1).T
    return PortfolioInstance(Q=Q, mean=mean, rho=rho, u=u, alpha=alpha)


def format_portfolio(inst: PortfolioInstance) -> str:
    """Text serialization of ``inst`` (the file contents)."""
    fmt = lambda values: " ".join(repr(float(v)) for v in values)
    out = [f"portfolio {FORMAT_VERSION}", f"n {inst.n} alpha {float(inst.alpha)!r} rho {float(inst.rho)!r}"]
    out += [fmt(inst.mean), fmt(inst.u)]
    out += [fmt(inst.Q[i, : i + 1]) for i in range(inst.n)]
    return "\n".join(out) + "\n"


def write_portfolio_file(inst: PortfolioInstance, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_portfolio(inst))
