"""Seeded sampling of observed datasets from a model.

Draws are made with a counter-based generator (Philox) keyed by the seed, and
each row consumes a fixed block of the stream, so row ``i`` of a sample is a
pure function of ``(model, seed, i)``.  Two calls with the same arguments are
bitwise identical, rows of a shorter sample are a prefix of a longer one, and
rows could be produced independently in parallel without changing anything.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ScenarioError
from .model import Intervention, StructuralModel
from .worlds import UNDEFINED, _Compiled

# Column order of datasets and of the CSV exchange format.
CSV_COLUMNS = ("A", "D", "Y", "L")


@dataclass(frozen=True)
class Dataset:
    """Observed rows over A, D, Y and optionally L.

    ``codes`` has one row per unit; the outcome column uses the undefined
    mark where the event occurred in a truncation model.
    """

    columns: tuple[str, ...]
    codes: np.ndarray
    seed: int | None = None

    @property
    def n(self) -> int:
        return self.codes.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.codes[:, self.columns.index(name)]

    def rows(self) -> Iterator[tuple]:
        for i in range(self.n):
            yield tuple(
                None if c == UNDEFINED else int(c) for c in self.codes[i]
            )


def sample_dataset(model: StructuralModel, n: int, seed: int) -> Dataset:
    """Draw ``n`` independent units from the model's observed law."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not (0 <= seed < 2**64):
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    comp = _Compiled(model)
    exo = comp.exo
    rng = np.random.Generator(np.random.Philox(key=seed))
    # One row of uniforms per unit (C order), so unit i depends only on
    # (seed, i) and on the number of exogenous variables.
    u = rng.random((n, len(exo)))
    env = {}
    for j, v in enumerate(exo):
        cum = np.cumsum(comp.weights[v.name])
        pos = np.searchsorted(cum, u[:, j], side="right")
        env[v.name] = np.minimum(pos, len(cum) - 1).astype(np.int32)
    values = comp.eval_world(env, n, Intervention({}))

    present = [c for c in CSV_COLUMNS if model.role_or_none(c)]
    cols = []
    for role in present:
        var = model.roles[role]
        cols.append(comp.codes_of[var][values[var]].astype(np.int64))
    codes = (
        np.column_stack(cols) if cols else np.zeros((n, 0), dtype=np.int64)
    )
    if model.truncation and "D" in present and "Y" in present:
        dead = codes[:, present.index("D")] == 1
        codes[dead, present.index("Y")] = UNDEFINED
    return Dataset(columns=tuple(present), codes=codes, seed=seed)


def dataset_to_csv(dataset: Dataset) -> str:
    """Render a dataset in the exchange format: header row, blank Y when undefined."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(dataset.columns)
    y_idx = dataset.columns.index("Y") if "Y" in dataset.columns else None
    for i in range(dataset.n):
        row = []
        for j, c in enumerate(dataset.codes[i]):
            if j == y_idx and c == UNDEFINED:
                row.append("")
            else:
                row.append(str(int(c)))
        writer.writerow(row)
    return buf.getvalue()


def dataset_from_csv(text: str) -> tuple[Dataset, list[tuple[int, str]]]:
    """Parse the exchange format.

    Returns the dataset plus a list of rejected rows as (line number, reason)
    pairs.  Structural problems (wrong header, non-integer codes, wrong field
    counts) raise ScenarioError; only semantically inconsistent rows, a blank
    outcome where the event did not occur, are rejected row by row.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ScenarioError("empty CSV: missing header row") from None
    header = tuple(h.strip() for h in header)
    if header not in (("A", "D", "Y"), ("A", "D", "Y", "L")):
        raise ScenarioError(
            f"unexpected CSV header {','.join(header)!r}; "
            "expected A,D,Y or A,D,Y,L"
        )
    rows = []
    rejected: list[tuple[int, str]] = []
    for lineno, raw in enumerate(reader, start=2):
        if not raw:
            continue
        if len(raw) != len(header):
            raise ScenarioError(
                f"line {lineno}: {len(raw)} fields, expected {len(header)}"
            )
        rec = {}
        for name, cell in zip(header, raw):
            cell = cell.strip()
            if name == "Y" and cell == "":
                rec[name] = None
                continue
            try:
                rec[name] = int(cell)
            except ValueError:
                raise ScenarioError(
                    f"line {lineno}: column {name} has non-integer value {cell!r}"
                ) from None
        if rec["A"] not in (0, 1):
            raise ScenarioError(f"line {lineno}: A must be 0 or 1")
        if rec["D"] not in (0, 1):
            raise ScenarioError(f"line {lineno}: D must be 0 or 1")
        if rec["Y"] is None and rec["D"] == 0:
            rejected.append((lineno, "blank Y on a row with D=0"))
            continue
        rows.append([
            rec[name] if rec[name] is not None else UNDEFINED for name in header
        ])
    codes = (
        np.asarray(rows, dtype=np.int64)
        if rows
        else np.zeros((0, len(header)), dtype=np.int64)
    )
    return Dataset(columns=header, codes=codes, seed=None), rejected
