"""Frequency tables of observed IPADs and their comparison with predicted measures."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import ValidationError
from ..ipad import Ipad, SurveyRow, format_ipad
from ..measure import MeasureReport, cl_measure

INTERVAL_WIDTH = 200_000
DEFAULT_INTERVALS = tuple((j * INTERVAL_WIDTH + 1, (j + 1) * INTERVAL_WIDTH) for j in range(5))


def round_half_up(x, places: int = 4) -> str:
    """Decimal string of x rounded half-up, computed exactly."""
    x = Fraction(x)
    scale = 10 ** places
    sign = "-" if x < 0 else ""
    n = (abs(x) * scale * 2 + 1) // 2
    return f"{sign}{n // scale}.{n % scale:0{places}d}"


@dataclass
class CensusRow:
    label: str
    counts: list
    ipad: Ipad | None = None
    types: int = 1

    @property
    def total(self) -> int:
        return sum(self.counts)


@dataclass
class CensusReport:
    intervals: tuple
    rows: list                      # named IPAD rows, descending total
    other: CensusRow
    incomplete: CensusRow
    class_groups: Counter = field(default_factory=Counter)

    @property
    def interval_totals(self) -> list[int]:
        rows = self.rows + [self.other, self.incomplete]
        return [sum(r.counts[j] for r in rows) for j in range(len(self.intervals))]

    @property
    def total(self) -> int:
        return sum(self.interval_totals)

    def all_rows(self) -> list[CensusRow]:
        return self.rows + [self.other, self.incomplete]

    def proportions(self, row: CensusRow) -> list[Fraction]:
        """Per-interval proportions followed by the cumulative one."""
        out = [Fraction(c, t) if t else Fraction(0) for c, t in zip(row.counts, self.interval_totals)]
        out.append(Fraction(row.total, self.total) if self.total else Fraction(0))
        return out

    def class_group_proportions(self) -> dict:
        n = sum(self.class_groups.values())
        return {cg: Fraction(k, n) for cg, k in sorted(self.class_groups.items(), key=lambda kv: (-kv[1], kv[0]))}

    def to_text(self, proportions: bool = False) -> str:
        names = [f"I{j + 1}" for j in range(len(self.intervals))]
        head = "\t".join(["IPAD", *names, "Cumulative" if proportions else "Total"])
        lines = [head]
        for r in self.all_rows():
            if proportions:
                cells = [round_half_up(x) for x in self.proportions(r)]
            else:
                cells = [str(c) for c in r.counts] + [str(r.total)]
            lines.append("\t".join([r.label, *cells]))
        if not proportions:
            lines.append("\t".join(["Total", *(str(t) for t in self.interval_totals), str(self.total)]))
        return "\n".join(lines) + "\n"


def _interval_of(disc: int, intervals) -> int:
    a = -disc
    for j, (lo, hi) in enumerate(intervals):
        if lo <= a <= hi:
            return j
    raise ValidationError(f"discriminant {disc} lies outside every interval")


def census(records, intervals=DEFAULT_INTERVALS, top: int | None = 14) -> CensusReport:
    """Counts per IPAD and interval; IPADs beyond the top ones go to Other."""
    intervals = tuple(tuple(iv) for iv in intervals)
    k = len(intervals)
    counts: dict = {}
    incomplete = [0] * k
    cgs: Counter = Counter()
    for r in records:
        j = _interval_of(r.discriminant, intervals)
        cgs[r.class_group] += 1
        if not r.complete:
            incomplete[j] += 1
            continue
        counts.setdefault(r.ipad, [0] * k)[j] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-sum(kv[1]), kv[0]))
    named = ranked if top is None else ranked[:top]
    rest = [] if top is None else ranked[top:]
    rows = [CensusRow(format_ipad(I), c, I) for I, c in named]
    other = CensusRow(f"Other IPADs ({len(rest)} types)", [sum(c[j] for _, c in rest) for j in range(k)], None, len(rest))
    return CensusReport(intervals, rows, other, CensusRow("Incomplete IPADs", incomplete, None, 0), cgs)


# -- comparison with predictions --------------------------------------------------------


def prediction_values(predictions) -> dict:
    """Normalise survey output, a measure report or a plain dict to {Ipad: Fraction}."""
    if isinstance(predictions, MeasureReport):
        from ..ipad import ipad

        out: dict = {}
        for e in predictions.entries:
            I = ipad(e.group)
            out[I] = out.get(I, Fraction(0)) + e.mass
        return out
    out = {}
    for I, v in dict(predictions).items():
        out[I] = v.resolved if isinstance(v, SurveyRow) else Fraction(v)
    return out


@dataclass
class ComparisonRow:
    label: str
    observed: Fraction | None
    predicted: Fraction | None
    per_interval: list

    @property
    def delta(self) -> Fraction | None:
        if self.observed is None or self.predicted is None:
            return None
        return self.observed - self.predicted


@dataclass
class Comparison:
    intervals: tuple
    rows: list
    class_groups: list  # (invariants, observed, predicted)

    def row(self, label: str) -> ComparisonRow:
        return next(r for r in self.rows if r.label == label)

    def to_text(self) -> str:
        names = [f"I{j + 1}" for j in range(len(self.intervals))]
        lines = ["\t".join(["IPAD", *names, "Cumulative", "Predicted", "Delta"])]
        for r in self.rows:
            cells = [round_half_up(x) for x in r.per_interval]
            obs = "" if r.observed is None else round_half_up(r.observed)
            pred = "" if r.predicted is None else round_half_up(r.predicted)
            delta = "" if r.delta is None else round_half_up(r.delta)
            lines.append("\t".join([r.label, *cells, obs, pred, delta]))
        lines.append("")
        lines.append("\t".join(["Class group", "Observed", "Cohen-Lenstra"]))
        for cg, obs, pred in self.class_groups:
            lines.append("\t".join(["[" + ",".join(map(str, cg)) + "]", round_half_up(obs), round_half_up(pred)]))
        return "\n".join(lines) + "\n"


def compare(report: CensusReport, predictions, p: int = 3, g: int = 2, class_groups: int = 4) -> Comparison:
    """Observed proportions next to predicted measures.

    Named census rows keep their counts whether or not a prediction exists;
    predicted IPADs that never occur in the data are appended with observed 0.
    """
    pred = prediction_values(predictions)
    rows = []
    seen = set()
    for r in report.rows:
        props = report.proportions(r)
        rows.append(ComparisonRow(r.label, props[-1], pred.get(r.ipad), props[:-1]))
        seen.add(r.ipad)
    k = len(report.intervals)
    for I, v in sorted(pred.items(), key=lambda kv: (-kv[1], kv[0])):
        if I not in seen and v:
            rows.append(ComparisonRow(format_ipad(I), Fraction(0) if report.total else None, v, [Fraction(0)] * k))
    for r in (report.other, report.incomplete):
        props = report.proportions(r)
        rows.append(ComparisonRow(r.label, props[-1], None, props[:-1]))
    cgs = []
    for cg, obs in list(report.class_group_proportions().items())[:class_groups]:
        if any(q % p for q in cg) or len(cg) != g:
            continue
        cgs.append((cg, obs, cl_measure(cg, g, p)))
    return Comparison(report.intervals, rows, cgs)


def bundled_predictions() -> dict:
    """The bundled frozen survey values for (p, g) = (3, 2)."""
    from importlib import resources

    from ..ipad import parse_ipad

    text = resources.files("schursigma.data").joinpath("predictions_3_2.tsv").read_text(encoding="utf-8")
    out = {}
    for ln in text.splitlines():
        if ln.startswith("#") or not ln.strip():
            continue
        ip, val = ln.split("\t")[:2]
        out[parse_ipad(ip)] = Fraction(val)
    return out
