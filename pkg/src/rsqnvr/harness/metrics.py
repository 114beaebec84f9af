"""Metric rows and their fixed CSV schema."""
import csv
import io
from dataclasses import astuple, dataclass, fields

HEADER = ("optimizer", "seed", "alpha", "epoch", "grad_evals", "seconds",
          "cost", "gap_or_test_mse", "train_mse", "grad_norm")
NA = "NA"


@dataclass(frozen=True)
class MetricRow:
    optimizer: str
    seed: int
    alpha: float | None
    epoch: int
    grad_evals: int
    seconds: float | None
    cost: float | None
    gap_or_test_mse: float | None
    train_mse: float | None
    grad_norm: float | None


_KINDS = {f.name: f.type for f in fields(MetricRow)}


def _fmt(value):
    if value is None:
        return NA
    if isinstance(value, float):
        # repr is the shortest string that parses back to the same double
        return repr(value)
    return str(value)


def _parse(name, text):
    if text == NA:
        return None
    kind = _KINDS[name]
    if kind is str:
        return text
    if kind is int:
        return int(text)
    return float(text)


def format_rows(rows, header=True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(HEADER)
    for row in rows:
        writer.writerow([_fmt(v) for v in astuple(row)])
    return buf.getvalue()


def parse_rows(text: str) -> list:
    reader = csv.reader(io.StringIO(text))
    head = next(reader, None)
    if tuple(head or ()) != HEADER:
        raise ValueError(f"unexpected CSV header {head}")
    return [MetricRow(*(_parse(n, t) for n, t in zip(HEADER, rec))) for rec in reader if rec]


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        fh.write(format_rows(rows))


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        return parse_rows(fh.read())
