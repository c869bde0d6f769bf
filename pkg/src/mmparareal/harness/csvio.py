"""CSV emission and parsing for sweep rows, slope fits and reports.

Floats are written with ``repr`` (shortest round-trip form), so parsing a
file reproduces the emitted values bit for bit.
"""

import csv
from dataclasses import astuple

from .experiments import SlopeFit, SweepRow, ValidationReport
from ..errors import ConfigError
from ..oumodel import AssumptionReport

SWEEP_HEADER = ("eps", "quantity", "k", "macro_sup", "micro_sup")
SLOPE_HEADER = ("quantity", "level", "k", "slope", "intercept", "eps_lo", "eps_hi", "points_used")
TRACE_HEADER = ("quantity", "k", "n", "kind", "index", "value")
VALIDATION_HEADER = ("component", "empirical", "moment_ode", "std_error", "z")


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write(path, header, records):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for rec in records:
            w.writerow([_fmt(v) for v in rec])


def _read(path, header):
    with open(path, newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        got = next(reader, None)
        if got is None or tuple(got) != tuple(header):
            raise ConfigError(f"{path}: expected header {','.join(header)}, got {got}")
        return [row for row in reader if row]


def write_sweep(rows, path):
    _write(path, SWEEP_HEADER, (astuple(r) for r in rows))


def read_sweep(path):
    return [
        SweepRow(float(e), q, int(k), float(M), float(m))
        for e, q, k, M, m in _read(path, SWEEP_HEADER)
    ]


def write_slopes(fits, path):
    _write(path, SLOPE_HEADER, (astuple(f) for f in fits))


def read_slopes(path):
    out = []
    for q, lv, k, s, b, lo, hi, n in _read(path, SLOPE_HEADER):
        out.append(SlopeFit(q, lv, int(k), float(s), float(b), float(lo), float(hi), int(n)))
    return out


def write_trace(traces, path):
    """Long-format dump of full traces; ``traces`` maps quantity -> PararealTrace."""
    records = []
    for quantity, tr in traces.items():
        for k in range(tr.K + 1):
            for n in range(tr.N + 1):
                for i, v in enumerate(tr.macro[k, n]):
                    records.append((quantity, k, n, "macro", i, float(v)))
                for i, v in enumerate(tr.micro[k, n]):
                    records.append((quantity, k, n, "micro", i, float(v)))
        for n in range(tr.N + 1):
            for i, v in enumerate(tr.reference[n]):
                records.append((quantity, "", n, "reference", i, float(v)))
    _write(path, TRACE_HEADER, records)


def write_validation(report, path):
    _write(path, VALIDATION_HEADER, (astuple(r) for r in report.rows))
    with open(path, "a") as fh:
        fh.write(f"# eps={report.eps!r} passed={str(report.passed).lower()} z_max={report.z_max!r}\n")


def write_report(report, path):
    report.to_csv(path)


def read_report(path):
    return AssumptionReport.from_csv(path)


def emit_csv(obj, path):
    """Write sweep rows, slope fits, an assumption report or a validation report."""
    if isinstance(obj, AssumptionReport):
        return write_report(obj, path)
    if isinstance(obj, ValidationReport):
        return write_validation(obj, path)
    items = list(obj)
    if items and isinstance(items[0], SlopeFit):
        return write_slopes(items, path)
    if all(isinstance(r, SweepRow) for r in items):
        return write_sweep(items, path)
    raise TypeError(f"don't know how to write {type(items[0]).__name__} records")


PLOT_STUB = '''"""Plot micro-macro Parareal errors against eps from a sweep CSV."""
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_path!r}
curves = defaultdict(list)
with open(path) as fh:
    for row in csv.DictReader(fh):
        for level in ("macro", "micro"):
            curves[(row["quantity"], level, int(row["k"]))].append(
                (float(row["eps"]), float(row[level + "_sup"]))
            )

fig, axes = plt.subplots(2, 2, figsize=(10, 8), sharex=True)
for i, quantity in enumerate(("mean", "variance")):
    for j, level in enumerate(("macro", "micro")):
        ax = axes[i][j]
        for (q, lv, k), pts in sorted(curves.items()):
            if q != quantity or lv != level:
                continue
            pts = [(e, v) for e, v in sorted(pts) if v > 0]
            if pts:
                ax.loglog(*zip(*pts), marker="o", label=f"k={{k}}")
        ax.set_title(f"{{level}} error, {{quantity}}")
        ax.set_xlabel("eps")
        ax.legend(fontsize="small")
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
'''


def write_plot_stub(csv_path, script_path):
    with open(script_path, "w") as fh:
        fh.write(PLOT_STUB.format(csv_path=str(csv_path)))
