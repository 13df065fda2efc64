"""Programmable quantum database over k-field records.

Records are tuples of basis indices, one per field. The joint register is
the tensor product of the field registers, laid out row-major with field 0
most significant::

    index = sum_j x_j * prod_{l > j} dim_l

A query fixes some fields (known) and searches over the others (unknown).
Each programmable step reflects about the stored records and then inverts
about the average of the unknown subspace, leaving the known registers
alone.
"""

from __future__ import annotations

import csv
import functools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from . import grover
from .grover import MarkedSet
from .statevec import StateVector, sample

Record = tuple

AUTO = "auto"
DENSE_LIMIT = 2 ** 12


class DatabaseError(ValueError):
    """Invalid database content. ``index`` is the offending record position, if any."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class FieldSpec:
    name: str
    dim: int
    values: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise DatabaseError(f"field {self.name!r}: dim must be positive")
        values = tuple(str(v) for v in self.values)
        if len(set(values)) != len(values):
            raise DatabaseError(f"field {self.name!r}: duplicate entries in value table")
        if len(values) > self.dim:
            raise DatabaseError(
                f"field {self.name!r}: {len(values)} distinct values exceed dim {self.dim}"
            )
        object.__setattr__(self, "values", values)

    def index_of(self, value: str) -> int:
        return self.values.index(value)

    def value_of(self, index: int) -> str:
        return self.values[index] if index < len(self.values) else f"#{index}"


@dataclass(frozen=True)
class Database:
    fields: tuple
    records: frozenset

    def __post_init__(self):
        fields = tuple(self.fields)
        if not fields:
            raise DatabaseError("database needs at least one field")
        names = [f.name for f in fields]
        if len(set(names)) != len(names):
            raise DatabaseError("duplicate field names")
        dims = tuple(f.dim for f in fields)
        records = frozenset(tuple(int(v) for v in r) for r in self.records)
        if not records:
            raise DatabaseError("database has no records")
        for r in records:
            if len(r) != len(fields):
                raise DatabaseError(f"record {r} has {len(r)} values, expected {len(fields)}")
            if any(not 0 <= v < d for v, d in zip(r, dims)):
                raise DatabaseError(f"record {r} out of range for dims {dims}")
        object.__setattr__(self, "fields", fields)
        object.__setattr__(self, "records", records)

    @property
    def k(self) -> int:
        return len(self.fields)

    @property
    def dims(self) -> tuple:
        return tuple(f.dim for f in self.fields)

    @property
    def size(self) -> int:
        """Dimension of the joint register."""
        return math.prod(self.dims)

    def position(self, name: str) -> int:
        for j, f in enumerate(self.fields):
            if f.name == name:
                return j
        raise KeyError(f"no field named {name!r}")

    def joint_index(self, record: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(record), self.dims))

    def record_at(self, index: int) -> Record:
        return tuple(int(v) for v in np.unravel_index(index, self.dims))

    def sorted_records(self) -> list:
        return sorted(self.records)

    def describe(self, record: Sequence[int]) -> dict:
        return {f.name: f.value_of(v) for f, v in zip(self.fields, record)}

    def task(self, known: Mapping[str, str], unknown: Optional[Iterable[str]] = None) -> "QueryTask":
        """Resolve a query given by field names and external string values.

        A value missing from a field's table maps to the first unused basis
        index of that field (so it matches no record); it is an error only
        when the table already fills the register.
        """
        fixed = {}
        for name, value in known.items():
            j = self.position(name)
            f = self.fields[j]
            if value in f.values:
                fixed[j] = f.index_of(value)
            elif len(f.values) < f.dim:
                fixed[j] = len(f.values)
            else:
                raise KeyError(f"value {value!r} is not representable in full field {name!r}")
        if unknown is None:
            free = [j for j in range(self.k) if j not in fixed]
        else:
            free = [self.position(n) for n in unknown]
        return QueryTask.create(fixed, free, self.k)


@dataclass(frozen=True)
class QueryTask:
    """Known field positions with fixed basis indices, and the unknown positions."""

    known: tuple
    unknown: tuple

    @classmethod
    def create(cls, known: Mapping[int, int], unknown: Iterable[int], k: int) -> "QueryTask":
        unknown = tuple(sorted(set(unknown)))
        task = cls(tuple(sorted(known.items())), unknown)
        if not unknown:
            raise ValueError("query needs at least one unknown field")
        if set(known) & set(unknown):
            raise ValueError("known and unknown fields overlap")
        if set(known) | set(unknown) != set(range(k)):
            raise ValueError(f"known and unknown fields must cover all {k} positions")
        return task

    def known_map(self) -> dict:
        return dict(self.known)

    def check(self, db: Database):
        if {j for j, _ in self.known} | set(self.unknown) != set(range(db.k)):
            raise ValueError("query does not cover the database fields")
        for j, v in self.known:
            if not 0 <= v < db.dims[j]:
                raise ValueError(f"known value {v} out of range for field {db.fields[j].name!r}")

    def unknown_dims(self, db: Database) -> tuple:
        return tuple(db.dims[j] for j in self.unknown)

    def unknown_size(self, db: Database) -> int:
        return math.prod(self.unknown_dims(db))

    def complete(self, db: Database, sub_index: int) -> Record:
        """Full record from an index of the unknown subspace."""
        values = dict(self.known)
        sub = np.unravel_index(sub_index, self.unknown_dims(db))
        values.update(zip(self.unknown, (int(v) for v in sub)))
        return tuple(values[j] for j in range(db.k))

    def sub_index(self, db: Database, record: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(record[j] for j in self.unknown), self.unknown_dims(db)))


@dataclass(frozen=True)
class SearchOutcome:
    candidate: Record
    verified: bool
    oracle_calls: int
    steps_used: int


@dataclass(frozen=True)
class SearchPlan:
    """Resolved geometry of a query: unknown-space size N and match count K."""

    N: int
    K: int
    steps: int
    params: Optional[grover.GroverParams] = field(default=None)


def build(field_specs: Sequence[Union[FieldSpec, tuple]], raw_records: Iterable[Sequence[str]]) -> Database:
    """Build a database from string tuples, extending each field's value table
    in order of first appearance."""
    specs = [f if isinstance(f, FieldSpec) else FieldSpec(*f) for f in field_specs]
    tables = [list(f.values) for f in specs]
    lookup = [{v: i for i, v in enumerate(t)} for t in tables]
    records = set()
    for n, raw in enumerate(raw_records):
        raw = tuple(str(v) for v in raw)
        if len(raw) != len(specs):
            raise DatabaseError(f"record {n}: expected {len(specs)} values, got {len(raw)}", n)
        rec = []
        for j, v in enumerate(raw):
            if v not in lookup[j]:
                if len(tables[j]) >= specs[j].dim:
                    raise DatabaseError(
                        f"record {n}: field {specs[j].name!r} has more than {specs[j].dim} distinct values",
                        n,
                    )
                lookup[j][v] = len(tables[j])
                tables[j].append(v)
            rec.append(lookup[j][v])
        rec = tuple(rec)
        if rec in records:
            raise DatabaseError(f"record {n}: duplicate record {raw}", n)
        records.add(rec)
    fields = tuple(FieldSpec(f.name, f.dim, tuple(t)) for f, t in zip(specs, tables))
    return Database(fields, frozenset(records))


def marked_set(db: Database, task: QueryTask) -> MarkedSet:
    """Indices of the unknown subspace whose completion is a stored record."""
    task.check(db)
    known = task.known_map()
    hits = [
        task.sub_index(db, r)
        for r in db.records
        if all(r[j] == v for j, v in known.items())
    ]
    return MarkedSet.of(task.unknown_size(db), hits)


def _check_joint(db: Database, s: StateVector):
    if s.dim != db.size:
        raise ValueError(f"dimension mismatch: state {s.dim}, database register {db.size}")


def _record_indices(db: Database) -> np.ndarray:
    return np.array([db.joint_index(r) for r in db.sorted_records()], dtype=np.intp)


def joint_oracle_apply(db: Database, s: StateVector) -> StateVector:
    """Reflection I - 2 sum_x |x><x| over all stored records."""
    _check_joint(db, s)
    a = s.amps.copy()
    a[_record_indices(db)] *= -1
    return StateVector(a)


def _diffuse_unknown(a: np.ndarray, db: Database, task: QueryTask) -> np.ndarray:
    # Move unknown axes last; every row is then one fiber of fixed known values.
    known_axes = [j for j, _ in task.known]
    order = known_axes + list(task.unknown)
    t = a.reshape(db.dims).transpose(order)
    shape = t.shape
    rows = t.reshape(-1, task.unknown_size(db))
    rows = 2.0 * rows.mean(axis=1, keepdims=True) - rows
    return rows.reshape(shape).transpose(np.argsort(order)).ravel()


def pqq_apply(db: Database, task: QueryTask, s: StateVector) -> StateVector:
    """One programmable query step: database reflection, then inversion
    about the average over the unknown registers."""
    _check_joint(db, s)
    task.check(db)
    a = s.amps.copy()
    a[_record_indices(db)] *= -1
    return StateVector(_diffuse_unknown(a, db, task))


def prepare_query(db: Database, task: QueryTask) -> StateVector:
    task.check(db)
    known = task.known_map()
    amps = np.ones(1, dtype=complex)
    for j, d in enumerate(db.dims):
        if j in known:
            part = np.zeros(d)
            part[known[j]] = 1.0
        else:
            part = np.full(d, 1.0 / math.sqrt(d))
        amps = np.kron(amps, part)
    return StateVector(amps)


def plan(db: Database, task: QueryTask, steps: Union[int, str, None] = AUTO) -> SearchPlan:
    """Resolve the step count. AUTO picks the integer nearest m0 for the
    actual match count, or 0 when no rotation is possible (K = 0 or K = N)."""
    N = task.unknown_size(db)
    K = len(marked_set(db, task))
    p = grover.params(N, K) if 0 < K < N else None
    if steps is None or steps == AUTO:
        n_steps = grover.optimal_steps(p) if p is not None else 0
    else:
        n_steps = int(steps)
        if n_steps < 0:
            raise ValueError("steps must be nonnegative")
    return SearchPlan(N, K, n_steps, p)


@functools.lru_cache(maxsize=16)
def _final_state(db: Database, task: QueryTask, steps: int) -> StateVector:
    s = prepare_query(db, task)
    for _ in range(steps):
        s = pqq_apply(db, task, s)
    return s


def search(db: Database, task: QueryTask, steps: Union[int, str, None], rng: np.random.Generator) -> SearchOutcome:
    """Programmable Grover search followed by one classical verification query."""
    resolved = plan(db, task, steps)
    s = _final_state(db, task, resolved.steps)
    candidate = db.record_at(sample(s, rng))
    return SearchOutcome(
        candidate=candidate,
        verified=candidate in db.records,
        oracle_calls=resolved.steps + 1,
        steps_used=resolved.steps,
    )


@functools.lru_cache(maxsize=16)
def _marked_mask(db: Database, task: QueryTask) -> np.ndarray:
    mask = marked_set(db, task).mask()
    mask.flags.writeable = False
    return mask


def classical_search(db: Database, task: QueryTask, rng: np.random.Generator):
    """Query completions of the unknown fields in random order until one is
    stored. Returns ``(record, calls)``, with ``record`` None if nothing matched."""
    mask = _marked_mask(db, task)
    order = rng.permutation(mask.size)
    hit = mask[order]
    first = int(hit.argmax())
    if not hit[first]:
        return None, int(order.size)
    return task.complete(db, int(order[first])), first + 1


def symmetry_deviation(db: Database) -> float:
    """Max entrywise gap between the three forms of the two-field database
    reflection: per-number blocks, per-name blocks, and the joint form."""
    if db.k != 2:
        raise ValueError(f"symmetry identity is stated for two fields, got {db.k}")
    if db.size > DENSE_LIMIT:
        raise ValueError(f"joint dimension {db.size} exceeds dense limit {DENSE_LIMIT}")
    d0, d1 = db.dims

    def ket_bra(d, i):
        e = np.zeros((d, d))
        e[i, i] = 1.0
        return e

    by_first = np.zeros((db.size, db.size))
    for n in range(d0):
        refl = np.eye(d1)
        for r in db.records:
            if r[0] == n:
                refl -= 2.0 * ket_bra(d1, r[1])
        by_first += np.kron(ket_bra(d0, n), refl)

    by_second = np.zeros((db.size, db.size))
    for a in range(d1):
        refl = np.eye(d0)
        for r in db.records:
            if r[1] == a:
                refl -= 2.0 * ket_bra(d0, r[0])
        by_second += np.kron(refl, ket_bra(d1, a))

    joint = np.eye(db.size)
    for r in db.records:
        joint -= 2.0 * np.kron(ket_bra(d0, r[0]), ket_bra(d1, r[1]))

    return float(max(
        np.max(np.abs(by_first - by_second)),
        np.max(np.abs(by_first - joint)),
        np.max(np.abs(by_second - joint)),
    ))


# Database documents

def to_dict(db: Database) -> dict:
    return {
        "fields": [{"name": f.name, "dim": f.dim, "values": list(f.values)} for f in db.fields],
        "records": [list(r) for r in db.sorted_records()],
    }


def from_dict(doc: dict) -> Database:
    try:
        fields = tuple(FieldSpec(f["name"], int(f["dim"]), tuple(f.get("values", ()))) for f in doc["fields"])
        records = frozenset(tuple(int(v) for v in r) for r in doc["records"])
    except (KeyError, TypeError) as exc:
        raise DatabaseError(f"malformed database document: {exc}") from exc
    if len(records) != len(doc["records"]):
        raise DatabaseError("database document contains duplicate records")
    return Database(fields, records)


def save(db: Database, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(to_dict(db), fh, indent=1)
        fh.write("\n")


def load(path) -> Database:
    with open(path, encoding="utf-8") as fh:
        return from_dict(json.load(fh))


def read_delimited(field_specs: Sequence[Union[FieldSpec, tuple]], path) -> Database:
    """Build a database from comma-separated text whose header names the fields.

    Errors are raised as DatabaseError whose ``index`` is the 1-based line
    number in the file.
    """
    specs = [f if isinstance(f, FieldSpec) else FieldSpec(*f) for f in field_specs]
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatabaseError("input is empty", 1) from None
        names = [f.name for f in specs]
        missing = [n for n in names if n not in header]
        if missing:
            raise DatabaseError(f"line 1: header lacks fields {missing}", 1)
        cols = [header.index(n) for n in names]
        rows, lines = [], []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DatabaseError(
                    f"line {reader.line_num}: expected {len(header)} columns, got {len(row)}",
                    reader.line_num,
                )
            rows.append([row[c].strip() for c in cols])
            lines.append(reader.line_num)
    try:
        return build(specs, rows)
    except DatabaseError as exc:
        if exc.index is None:
            raise
        line = lines[exc.index]
        msg = str(exc).replace(f"record {exc.index}", f"line {line}", 1)
        raise DatabaseError(msg, line) from None
