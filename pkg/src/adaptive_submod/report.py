"""Machine-readable run reports.

One report per algorithm run, carrying the ledger counters verbatim.  Real
numbers are rendered as decimal strings with 12 significant digits so that
reports are diffable and parse identically everywhere.  The JSON record
omits wall-clock time by default: identical flags and seed must produce
byte-identical records, and timing is the one field that cannot honor
that.  Sweeps include a wall_ms column since their rows are not covered by
the determinism contract.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

CSV_HEADER = "algorithm,n,k,eps,delta,seed,value,size,queries,rounds,wall_ms,opt,ratio"


def format_real(x: float | None) -> str:
    if x is None:
        return ""
    return f"{float(x):.12g}"


@dataclass
class RunReport:
    """Everything measurable about one algorithm run."""

    algorithm: str
    instance: str
    n: int
    k: int | None
    eps: float | None
    delta: float | None
    seed: int
    value: float
    solution_size: int
    queries: int
    rounds: int
    wall_ms: float
    opt_reference: float | None = None

    @property
    def ratio(self) -> float | None:
        if self.opt_reference is None or self.opt_reference == 0:
            return None
        return self.value / self.opt_reference

    def to_json(self, include_timing: bool = False) -> str:
        doc = {
            "algorithm": self.algorithm,
            "instance": self.instance,
            "n": self.n,
            "k": self.k,
            "eps": format_real(self.eps) if self.eps is not None else None,
            "delta": format_real(self.delta) if self.delta is not None else None,
            "seed": self.seed,
            "value": format_real(self.value),
            "size": self.solution_size,
            "queries": self.queries,
            "rounds": self.rounds,
            "opt": format_real(self.opt_reference) if self.opt_reference is not None else None,
            "ratio": format_real(self.ratio) if self.ratio is not None else None,
        }
        if include_timing:
            doc["wall_ms"] = format_real(self.wall_ms)
        return json.dumps(doc, separators=(",", ":"))

    def to_csv_row(self) -> str:
        cells = [
            self.algorithm,
            str(self.n),
            str(self.k) if self.k is not None else "",
            format_real(self.eps) if self.eps is not None else "",
            format_real(self.delta) if self.delta is not None else "",
            str(self.seed),
            format_real(self.value),
            str(self.solution_size),
            str(self.queries),
            str(self.rounds),
            format_real(self.wall_ms),
            format_real(self.opt_reference) if self.opt_reference is not None else "",
            format_real(self.ratio) if self.ratio is not None else "",
        ]
        return ",".join(cells)

    def human_summary(self) -> str:
        parts = [
            f"{self.algorithm} on {self.instance} (n={self.n}"
            + (f", k={self.k}" if self.k is not None else "") + ")",
            f"  value={format_real(self.value)} size={self.solution_size}",
            f"  queries={self.queries} rounds={self.rounds} "
            f"wall_ms={format_real(self.wall_ms)} seed={self.seed}",
        ]
        if self.opt_reference is not None:
            parts.append(f"  opt={format_real(self.opt_reference)} "
                         f"ratio={format_real(self.ratio)}")
        return "\n".join(parts)
