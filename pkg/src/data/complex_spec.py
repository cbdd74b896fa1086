"""複体のテキスト形式

    field <p>
    levels <v0> <v1> ...
    cell <id> <dim> <grade>
    entry <n> <行 id> <列 id> <係数>

id が `0-1-2` の形なら頂点番号のタプル（単体）として読み、それ以外は文字列のまま。
`"7"` のように二重引用符で囲んだ id は中身をそのまま文字列として読む（単体と紛らわしい
文字列 id はこの形で書き出す）。
`#` 以降はコメント。
"""
from __future__ import annotations

import numbers
import re
from collections import defaultdict
from collections.abc import Iterable
from pathlib import Path

import structlog

from src.algebra.field import make_field
from src.algebra.spmat import CellId
from src.complex.filtered import Cell, FilteredComplex, from_boundaries
from src.config.settings import get_settings
from src.errors import ComplexSpecError, PersistenceError

logger = structlog.get_logger()

_SIMPLEX_ID = re.compile(r"\d+(?:-\d+)*")


def parse_id(token: str) -> CellId:
    if len(token) >= 2 and token[0] == token[-1] == '"':
        return token[1:-1]
    if _SIMPLEX_ID.fullmatch(token):
        return tuple(int(v) for v in token.split("-"))
    return token


def format_id(e: CellId) -> str:
    if isinstance(e, tuple) and e and all(isinstance(v, numbers.Integral) and v >= 0 for v in e):
        return "-".join(str(int(v)) for v in e)
    if not isinstance(e, str) or not e or any(ch.isspace() or ch == "#" for ch in e):
        raise ComplexSpecError(f"Cell id {e!r} cannot be written as a single token")
    if _SIMPLEX_ID.fullmatch(e) or e.startswith('"'):
        return f'"{e}"'
    return e


def _ints(tokens: Iterable[str], lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in tokens]
    except ValueError as exc:
        raise ComplexSpecError(f"Line {lineno}: expected integers ({exc})") from exc


def parse_complex_spec(text: str) -> FilteredComplex:
    """テキストから複体を作る

    Args:
        text: complex-spec 形式の文字列

    Returns:
        検証済みの FilteredComplex
    """
    prime: int | None = None
    levels: list[float] | None = None
    cells: list[Cell] = []
    entries: dict[int, list[tuple[CellId, CellId, int]]] = defaultdict(list)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *args = line.split()
        if keyword == "field" and len(args) == 1:
            (prime,) = _ints(args, lineno)
        elif keyword == "levels":
            try:
                levels = [float(v) for v in args]
            except ValueError as exc:
                raise ComplexSpecError(f"Line {lineno}: bad level value ({exc})") from exc
        elif keyword == "cell" and len(args) == 3:
            dim, grade = _ints(args[1:], lineno)
            try:
                cells.append(Cell(parse_id(args[0]), dim, grade))
            except PersistenceError as exc:
                raise ComplexSpecError(f"Line {lineno}: {exc}") from exc
        elif keyword == "entry" and len(args) == 4:
            n, coeff = _ints([args[0], args[3]], lineno)
            entries[n].append((parse_id(args[1]), parse_id(args[2]), coeff))
        else:
            raise ComplexSpecError(f"Line {lineno}: cannot parse {raw.strip()!r}")

    field = make_field(prime if prime is not None else get_settings().default_prime)
    complex_ = from_boundaries(cells, entries, field, levels)
    logger.debug("Complex spec parsed", cells=complex_.cell_counts(), prime=field.p)
    return complex_


def dump_complex_spec(K: FilteredComplex) -> str:
    """複体をテキストに書き出す（parse_complex_spec で同じ複体に戻る）"""
    lines = [f"field {K.field.p}"]
    if K.level_values:
        lines.append("levels " + " ".join(repr(v) for v in K.level_values))
    for cell in K.iter_cells():
        lines.append(f"cell {format_id(cell.id)} {cell.dim} {cell.grade}")
    for n in range(1, K.top_dim + 1):
        for col, column in K.boundary(n).nonzero_columns():
            for row, coeff in column.items():
                lines.append(f"entry {n} {format_id(row)} {format_id(col)} {coeff}")
    return "\n".join(lines) + "\n"


def load_complex_spec(path: Path) -> FilteredComplex:
    return parse_complex_spec(Path(path).read_text(encoding="utf-8"))
