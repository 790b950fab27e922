"""Table presets, sweep runner and renderers (markdown, csv, json)."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from genrank.generic_rank import (
    GenericRankResult,
    RankConfig,
    SaturationError,
    consensus_rank,
    splitmix64,
)
from genrank.structures import (
    CenteredSymmetricSlices,
    Free,
    Symmetric,
    SymmetricSlices,
    TensorStructure,
    from_dict,
    to_dict,
)

log = logging.getLogger(__name__)

PRESET_IDS = ("table1", "table2", "table3", "table4", "table5", "table6")

# Column layout of the 2-, 3- and 4-slice table: (K, J) pairs.
TABLE1_COLUMNS = ((2, 2), (2, 3), (2, 4), (3, 3), (3, 4), (3, 5), (4, 4), (4, 5))
TABLE1_ROWS = tuple(range(2, 13))


@dataclass(frozen=True)
class Cell:
    structure: TensorStructure
    row: str
    col: str

    @property
    def key(self) -> str:
        return f"{self.row}|{self.col}"


@dataclass(frozen=True)
class TablePreset:
    id: str
    title: str
    cells: tuple[Cell, ...]
    fiber_rows: bool = False


def _table1():
    cells = []
    for i in TABLE1_ROWS:
        for k, j in TABLE1_COLUMNS:
            cells.append(Cell(Free((i, j, k)), f"I={i}", f"K={k} J={j}"))
    return TablePreset("table1", "Typical ranks of 2-, 3- and 4-slice arrays I x J x K", tuple(cells))


def _table2():
    cells = tuple(Cell(Free((k, k, k)), "R", f"K={k}") for k in range(2, 10))
    return TablePreset("table2", "Generic rank of K x K x K arrays", cells)


def _table3():
    cells = [Cell(Free((n,) * 3), "L=3", f"N={n}") for n in range(2, 9)]
    cells += [Cell(Free((n,) * 4), "L=4", f"N={n}") for n in range(2, 7)]
    return TablePreset("table3", "Generic rank of order-L arrays with equal dimensions N", tuple(cells), True)


def _slices(kind, title, pid):
    cells = tuple(
        Cell(kind(j, i), f"I={i}", f"J={j}") for i in range(2, 11) for j in range(2, 6)
    )
    return TablePreset(pid, title, cells)


def _table6():
    cells = [Cell(Symmetric(n, order), f"L={order}", f"N={n}") for order in (3, 4) for n in range(2, 9)]
    return TablePreset("table6", "Generic rank of symmetric arrays of dimension N and order L", tuple(cells), True)


def preset(pid: str) -> TablePreset:
    builders = {
        "table1": _table1,
        "table2": _table2,
        "table3": _table3,
        "table4": lambda: _slices(SymmetricSlices, "Typical ranks of I x J x J arrays with symmetric slices", "table4"),
        "table5": lambda: _slices(
            CenteredSymmetricSlices, "Typical ranks of I x J x J arrays with double-centered symmetric slices", "table5"
        ),
        "table6": _table6,
    }
    if pid not in builders:
        raise ValueError(f"unknown preset {pid!r}; expected one of {', '.join(PRESET_IDS)}")
    return builders[pid]()


def cell_seed(seed: int, pid: str, cell_key: str) -> int:
    digest = hashlib.blake2b(f"{pid}:{cell_key}".encode(), digest_size=8).digest()
    return splitmix64(seed ^ int.from_bytes(digest, "little"))


@dataclass
class CellResult:
    row: str
    col: str
    structure: TensorStructure
    result: GenericRankResult | None = None
    agreement: bool | None = None
    error: str | None = None
    saturation_failure: bool = False
    seconds: float = 0.0


@dataclass
class TableReport:
    preset: str
    title: str
    seed: int
    backend: str
    trials: int
    cells: list[CellResult] = field(default_factory=list)
    fiber_rows: bool = False

    @property
    def ok(self) -> bool:
        return all(c.result is not None for c in self.cells)

    def ranks(self, row: str | None = None) -> list[int | None]:
        return [
            c.result.rank if c.result else None for c in self.cells if row is None or c.row == row
        ]

    def fibers(self, row: str | None = None) -> list[int | None]:
        return [
            c.result.fiber_dim if c.result else None for c in self.cells if row is None or c.row == row
        ]


def run_cell(structure: TensorStructure, cfg: RankConfig, cache=None) -> CellResult:
    """Consensus rank of one structure, catching per-cell failures."""
    out = CellResult(row="", col="", structure=structure)
    start = time.perf_counter()
    hit = cache.lookup(structure, cfg) if cache is not None else None
    try:
        if hit is not None:
            out.result, out.agreement = hit
        else:
            out.result, out.agreement = consensus_rank(structure, cfg)
            if cache is not None:
                cache.store(structure, cfg, out.result, out.agreement)
    except SaturationError as exc:
        out.error = str(exc)
        out.saturation_failure = True
    except Exception as exc:  # one bad cell must not sink the sweep
        out.error = f"{type(exc).__name__}: {exc}"
    out.seconds = time.perf_counter() - start
    return out


def _run_cell_job(args):
    structure, cfg = args
    return run_cell(structure, cfg)


def run_preset(pid: str, cfg: RankConfig = RankConfig(), parallelism: int = 1, cache=None) -> TableReport:
    """Run every cell of a preset.

    Each cell gets its own seed derived from ``(cfg.seed, pid, cell key)``, so
    results do not depend on ``parallelism`` or on completion order.
    """
    tp = preset(pid)
    cfgs = [replace(cfg, seed=cell_seed(cfg.seed, pid, c.key)) for c in tp.cells]
    report = TableReport(
        preset=pid,
        title=tp.title,
        seed=cfg.seed,
        backend=cfg.ring.describe(),
        trials=cfg.trials,
        fiber_rows=tp.fiber_rows,
    )

    results: list[CellResult | None] = [None] * len(tp.cells)
    todo = []
    for idx, (cell, ccfg) in enumerate(zip(tp.cells, cfgs)):
        hit = cache.lookup(cell.structure, ccfg) if cache is not None else None
        if hit is not None:
            results[idx] = CellResult("", "", cell.structure, hit[0], hit[1])
        else:
            todo.append(idx)

    if parallelism > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            jobs = [(tp.cells[i].structure, cfgs[i]) for i in todo]
            for idx, res in zip(todo, pool.map(_run_cell_job, jobs)):
                results[idx] = res
    else:
        for idx in todo:
            results[idx] = run_cell(tp.cells[idx].structure, cfgs[idx])

    for idx in todo:
        res = results[idx]
        if cache is not None and res.result is not None:
            cache.store(res.structure, cfgs[idx], res.result, res.agreement)

    for cell, res in zip(tp.cells, results):
        res.row, res.col = cell.row, cell.col
        if res.error:
            log.warning("%s %s/%s failed: %s", pid, cell.row, cell.col, res.error)
        report.cells.append(res)
    return report


def single_report(structure: TensorStructure, cfg: RankConfig, cache=None) -> TableReport:
    """Report holding one cell, for the single-structure subcommands."""
    res = run_cell(structure, cfg, cache)
    res.row, res.col = "R", structure.describe()
    report = TableReport(
        preset="single",
        title=structure.describe(),
        seed=cfg.seed,
        backend=cfg.ring.describe(),
        trials=cfg.trials,
    )
    report.cells.append(res)
    return report


# rendering -----------------------------------------------------------------

CSV_FIELDS = ("preset", "row", "col", "rank", "image_dim", "fiber_dim", "ambient_dim", "agreement", "seed")


def result_to_dict(res: GenericRankResult) -> dict:
    return {
        "structure": to_dict(res.structure),
        "rank": res.rank,
        "image_dim": res.image_dim,
        "fiber_dim": res.fiber_dim,
        "ambient_dim": res.ambient_dim,
        "params_per_term": res.params_per_term,
        "terms_appended": res.terms_appended,
        "backend": res.backend,
        "seed": res.seed,
        "rank_history": list(res.rank_history),
    }


def result_from_dict(d: dict) -> GenericRankResult:
    return GenericRankResult(
        structure=from_dict(d["structure"]),
        rank=d["rank"],
        image_dim=d["image_dim"],
        fiber_dim=d["fiber_dim"],
        ambient_dim=d["ambient_dim"],
        params_per_term=d["params_per_term"],
        terms_appended=d["terms_appended"],
        backend=d["backend"],
        seed=d["seed"],
        rank_history=tuple(d.get("rank_history", ())),
    )


def _cell_dict(report: TableReport, c: CellResult) -> dict:
    d = {"row": c.row, "col": c.col}
    if c.result is not None:
        d.update(result_to_dict(c.result))
    else:
        d.update({"structure": to_dict(c.structure), "rank": None, "image_dim": None, "fiber_dim": None})
        d["error"] = c.error
    d["agreement"] = c.agreement
    d["trials"] = report.trials
    d.setdefault("backend", report.backend)
    return d


def render_json(report: TableReport, timings: bool = False) -> str:
    doc = {
        "preset": report.preset,
        "title": report.title,
        "seed": report.seed,
        "backend": report.backend,
        "trials": report.trials,
        "cells": [_cell_dict(report, c) for c in report.cells],
    }
    if timings:
        for d, c in zip(doc["cells"], report.cells):
            d["seconds"] = round(c.seconds, 6)
    return json.dumps(doc, indent=2) + "\n"


def render_csv(report: TableReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for c in report.cells:
        r = c.result
        w.writerow(
            [
                report.preset,
                c.row,
                c.col,
                r.rank if r else "",
                r.image_dim if r else "",
                r.fiber_dim if r else "",
                r.ambient_dim if r else "",
                c.agreement if c.agreement is not None else "",
                r.seed if r else "",
            ]
        )
    return buf.getvalue()


def _grid(report, value):
    rows, cols = [], []
    table = {}
    for c in report.cells:
        if c.row not in rows:
            rows.append(c.row)
        if c.col not in cols:
            cols.append(c.col)
        table[c.row, c.col] = c
    lines = ["| | " + " | ".join(cols) + " |", "|---" * (len(cols) + 1) + "|"]
    for row in rows:
        vals = []
        for col in cols:
            c = table.get((row, col))
            if c is None:
                vals.append("")
            elif c.result is None:
                vals.append("err")
            else:
                mark = "" if c.agreement in (True, None) else "*"
                vals.append(f"{value(c.result)}{mark}")
        lines.append(f"| {row} | " + " | ".join(vals) + " |")
    return lines


def render_markdown(report: TableReport) -> str:
    lines = [f"### {report.title}", ""]
    lines += _grid(report, lambda r: r.rank)
    if report.fiber_rows or report.preset == "single":
        lines += ["", "Fiber dimension F:", ""]
        lines += _grid(report, lambda r: r.fiber_dim)
    lines += ["", f"seed={report.seed} backend={report.backend} trials={report.trials}"]
    if any(c.agreement is False for c in report.cells):
        lines.append("`*` trials disagreed for this cell")
    return "\n".join(lines) + "\n"


def render(report: TableReport, fmt: str = "markdown") -> str:
    if fmt in ("md", "markdown"):
        return render_markdown(report)
    if fmt == "csv":
        return render_csv(report)
    if fmt == "json":
        return render_json(report)
    raise ValueError(f"unknown format {fmt!r}")
