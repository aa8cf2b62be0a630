"""Number-field IPAD records and their CSV form.

One row per imaginary quadratic field:

    discriminant,classgroup,sub1,sub2,sub3,sub4,complete
    -4027,3-3,3-3-3,3-9,3-9,3-9,1

Invariants are dash-separated p-powers, ``?`` marks a subfield class group
that was not computed, and the header line is mandatory.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from importlib import resources

from ..errors import ValidationError
from ..ipad import Ipad, parse_ipad

COLUMNS = ["discriminant", "classgroup", "sub1", "sub2", "sub3", "sub4", "complete"]
DATA_PACKAGE = "schursigma.data"
CENSUS_FILE = "census_reconstruction.csv"


@dataclass(frozen=True)
class FieldRecord:
    discriminant: int
    class_group: tuple
    subfield_groups: tuple  # entries are tuples or None when missing
    complete: bool

    @property
    def ipad(self) -> Ipad | None:
        if not self.complete:
            return None
        return Ipad.make(self.class_group, self.subfield_groups)


def _parse_inv(text: str, lineno: int, what: str) -> tuple:
    try:
        inv = tuple(sorted(int(x) for x in text.split("-")))
    except ValueError:
        raise ValidationError(f"line {lineno}: bad {what} {text!r}") from None
    if not inv or any(q < 2 for q in inv):
        raise ValidationError(f"line {lineno}: bad {what} {text!r}")
    return inv


def _fmt_inv(inv) -> str:
    return "?" if inv is None else "-".join(str(q) for q in inv)


def parse_field_data(source, p: int = 3, g: int = 2) -> list[FieldRecord]:
    """Records from a path, a file object or CSV text."""
    text = _read(source)
    if not text.strip():
        return []
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if [h.strip() for h in header] != COLUMNS:
        raise ValidationError("line 1: header must be " + ",".join(COLUMNS))
    nsub = (p ** g - 1) // (p - 1)
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row or not "".join(row).strip():
            continue
        row = [c.strip() for c in row]
        if len(row) != 3 + nsub:
            raise ValidationError(f"line {lineno}: expected {3 + nsub} fields, got {len(row)}")
        try:
            disc = int(row[0])
        except ValueError:
            raise ValidationError(f"line {lineno}: bad discriminant {row[0]!r}") from None
        if disc > -3:
            raise ValidationError(f"line {lineno}: discriminant must be negative with |d| >= 3")
        cg = _parse_inv(row[1], lineno, "class group")
        if len(cg) != g:
            raise ValidationError(f"line {lineno}: class group {row[1]} does not have rank {g}")
        subs = tuple(None if c == "?" else _parse_inv(c, lineno, "subfield class group") for c in row[2:2 + nsub])
        if row[-1] not in ("0", "1"):
            raise ValidationError(f"line {lineno}: complete flag must be 0 or 1")
        complete = row[-1] == "1"
        if complete != all(s is not None for s in subs):
            raise ValidationError(f"line {lineno}: complete flag disagrees with missing entries")
        out.append(FieldRecord(disc, cg, subs, complete))
    return out


def _read(source) -> str:
    if hasattr(source, "read"):
        return source.read()
    s = str(source)
    if "\n" in s or "," in s:
        return s
    with open(s, encoding="utf-8") as fh:
        return fh.read()


def format_field_data(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        w.writerow([r.discriminant, _fmt_inv(r.class_group), *(_fmt_inv(s) for s in r.subfield_groups),
                    int(r.complete)])
    return buf.getvalue()


def load_census_data() -> list[FieldRecord]:
    """The bundled reconstruction of the reference census."""
    text = resources.files(DATA_PACKAGE).joinpath(CENSUS_FILE).read_text(encoding="utf-8")
    return parse_field_data(text)


# -- reconstruction of the reference census --------------------------------------------

# rows of the reference census: IPAD and counts in the five intervals
CENSUS_ROWS = [
    ("[3,3];[3,3,3][3,9]^3", (105, 138, 116, 124, 114)),
    ("[3,9];[3,3,9]^2[3,27]^2", (51, 79, 79, 61, 80)),
    ("[3,3];[3,3,3]^3[3,9]", (52, 45, 71, 62, 42)),
    ("[3,3];[3,9]^3[9,27]", (50, 50, 50, 51, 39)),
    ("[3,3];[3,3,3]^2[3,9]^2", (47, 46, 39, 61, 42)),
    ("[3,3];[3,3,3][3,9]^2[9,27]", (50, 43, 47, 40, 41)),
    ("[3,3];[3,3,3]^2[9,27]^2", (16, 15, 23, 17, 25)),
    ("[3,3];[3,9]^4", (18, 17, 18, 19, 14)),
    ("[3,27];[3,3,27]^2[3,81]^2", (10, 18, 20, 20, 16)),
    ("[3,9];[3,3,9][3,9,27][3,27]^2", (17, 16, 24, 8, 18)),
    ("[3,9];[3,3,9][3,27]^3", (20, 19, 15, 7, 9)),
    ("[3,9];[3,3,9][3,27]^2[9,9,9]", (16, 11, 11, 10, 12)),
    ("[3,9];[3,3,3,3][3,27]^3", (5, 12, 13, 9, 15)),
    ("[3,9];[3,9,27][3,27]^3", (6, 13, 8, 12, 13)),
]
OTHER_ROW = (20, 61, 56, 72, 71)
INCOMPLETE_ROW = (15, 48, 73, 122, 152)
OTHER_TYPES = 49
ALMOST_COMPLETE = 189  # incomplete records missing a single subfield

# class groups of the records outside the named rows, chosen so that the
# class-group proportions over all 3190 fields are 0.6332, 0.2743, 0.0740, 0.0107
OTHER_CLASS_GROUPS = [((3, 3), 100, 14), ((3, 9), 70, 12), ((3, 27), 51, 9), ((3, 81), 34, 6),
                      ((9, 9), 12, 4), ((3, 243), 8, 2), ((9, 27), 5, 2)]
INCOMPLETE_CLASS_GROUPS = [((3, 3), 173), ((3, 9), 136), ((3, 27), 101)]


def _other_types(head: tuple, k: int, taken: set) -> list[Ipad]:
    """k IPADs with the given head, distinct from each other and from taken.

    Entries are drawn from abelian groups of rank 2 to 4 that contain the
    head's exponent pattern; these are placeholders, not computed IPADs.
    """
    a, b = head
    pool = [(3, a, b), (a, 3 * b), (3 * a, 3 * b), (3, 3, a, b), (a, 9 * b), (9, 3 * a, b), (3 * a, 9 * b), (3, 3 * a, 3 * b)]
    pool = [tuple(sorted(e)) for e in pool]
    out = []
    for combo in itertools.combinations_with_replacement(range(len(pool)), 4):
        I = Ipad.make(head, [pool[i] for i in combo])
        if I in taken or I in out:
            continue
        out.append(I)
        if len(out) == k:
            return out
    raise ValidationError("not enough placeholder IPADs")


def _discriminants(interval: int, count: int, start: int = 0) -> list[int]:
    """count distinct values -|d| with |d| = 3 mod 4 spread through interval."""
    lo = interval * 200_000 + 1
    step = 200_000 // (count + start + 1)
    step -= step % 4
    out = []
    for k in range(start, start + count):
        d = lo + 2 + step * (k + 1)
        d += (3 - d) % 4
        out.append(-d)
    return out


def reconstruct_census() -> list[FieldRecord]:
    """Per-field records whose census reproduces the reference counts.

    Discriminants are synthetic placeholders inside the right interval, the
    49 "other" IPAD types and the missing-entry patterns are invented, and
    the class-group split outside the named rows is fitted to the reference
    class-group proportions.  Only counts are meaningful.
    """
    slots = [[] for _ in range(5)]  # per interval: (class group, subfields, complete)
    named = set()
    for txt, counts in CENSUS_ROWS:
        I = parse_ipad(txt)
        named.add(I)
        for j, c in enumerate(counts):
            slots[j].extend([(I.head, I.entries, True)] * c)
    # other complete IPADs, dealt round-robin into interval quotas
    other = []
    for head, total, ntypes in OTHER_CLASS_GROUPS:
        types = _other_types(head, ntypes, named)
        for k in range(total):
            other.append(types[k % ntypes])
    quota = list(OTHER_ROW)
    j = 0
    for I in other:
        while quota[j] == 0:
            j = (j + 1) % 5
        slots[j].append((I.head, I.entries, True))
        quota[j] -= 1
        j = (j + 1) % 5
    # incomplete records
    inc = [cg for cg, n in INCOMPLETE_CLASS_GROUPS for _ in range(n)]
    quota = list(INCOMPLETE_ROW)
    j = 0
    for k, cg in enumerate(inc):
        while quota[j] == 0:
            j = (j + 1) % 5
        missing = 1 if k < ALMOST_COMPLETE else 2 + k % 3
        known = tuple(tuple(sorted((3,) + cg)) for _ in range(4 - missing))
        slots[j].append((cg, known + (None,) * missing, False))
        quota[j] -= 1
        j = (j + 1) % 5
    records = []
    for j, items in enumerate(slots):
        discs = _discriminants(j, len(items))
        if j == 0:
            discs[0] = -4027
        for d, (cg, subs, complete) in zip(discs, items):
            records.append(FieldRecord(d, tuple(cg), tuple(subs), complete))
    records.sort(key=lambda r: -r.discriminant)
    return records
