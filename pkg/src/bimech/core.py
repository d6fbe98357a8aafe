"""Scheduling instances, assignments and exact objective evaluation.

Loads are exact rationals. The two validity conventions are encoded with
IEEE infinities, which compare correctly against ``Fraction``:

* makespan is ``+inf`` unless every job column sums to exactly one;
* fairness is ``-inf`` if some job column sums to more than one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, Union

from .errors import StructuralError

INF = math.inf
NEG_INF = -math.inf

Rational = Fraction
Extended = Union[Fraction, float]
Matrix = tuple[tuple[Fraction, ...], ...]


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise StructuralError(f"not a rational: {value!r}")
    if isinstance(value, (int, str)):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise StructuralError(f"not a rational: {value!r}") from exc
    if isinstance(value, float):
        if not math.isfinite(value):
            raise StructuralError(f"not a finite rational: {value!r}")
        return Fraction(value)
    raise StructuralError(f"not a rational: {value!r}")


def frac_str(q: Fraction) -> str:
    """``num/den`` encoding used in every file this package writes."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _as_matrix(rows: Iterable[Iterable], k: int | None = None, m: int | None = None) -> Matrix:
    out = tuple(tuple(to_fraction(v) for v in row) for row in rows)
    if k is not None and len(out) != k:
        raise StructuralError(f"expected {k} rows, got {len(out)}")
    widths = {len(r) for r in out}
    if len(widths) > 1:
        raise StructuralError("ragged matrix")
    if m is not None and out and len(out[0]) != m:
        raise StructuralError(f"expected {m} columns, got {len(out[0])}")
    return out


@dataclass(frozen=True)
class SchedulingInstance:
    k: int
    m: int
    p: Matrix
    c: Matrix
    normalized: bool = False
    scale: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.k < 1 or self.m < 1:
            raise StructuralError("k and m must be positive")
        object.__setattr__(self, "p", _as_matrix(self.p, self.k, self.m))
        object.__setattr__(self, "c", _as_matrix(self.c, self.k, self.m))
        object.__setattr__(self, "scale", to_fraction(self.scale))
        if any(v < 0 for row in self.p for v in row):
            raise StructuralError("processing times must be nonnegative")
        if self.normalized and any(v > 1 for row in self.p for v in row):
            raise StructuralError("normalized instance has a processing time above 1")
        if self.scale <= 0:
            raise StructuralError("scale must be positive")

    @classmethod
    def from_lists(cls, p: Sequence[Sequence], c: Sequence[Sequence] | None = None, **kw) -> SchedulingInstance:
        k, m = len(p), len(p[0]) if p else 0
        if c is None:
            c = [[0] * m for _ in range(k)]
        return cls(k=k, m=m, p=p, c=c, **kw)

    def with_costs(self, c: Sequence[Sequence]) -> SchedulingInstance:
        return SchedulingInstance(self.k, self.m, self.p, c, self.normalized, self.scale)

    def permuted(self, perm: Sequence[int]) -> SchedulingInstance:
        """Machine ``i`` of the result is machine ``perm[i]`` of ``self``."""
        return SchedulingInstance(
            self.k, self.m, [self.p[i] for i in perm], [self.c[i] for i in perm], self.normalized, self.scale
        )

    def distinct_p(self) -> list[Fraction]:
        return sorted({v for row in self.p for v in row})

    def to_json(self) -> dict:
        doc = {
            "k": self.k,
            "m": self.m,
            "p": [[frac_str(v) for v in row] for row in self.p],
            "c": [[frac_str(v) for v in row] for row in self.c],
        }
        if self.normalized:
            doc["normalized"] = True
            doc["scale"] = frac_str(self.scale)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> SchedulingInstance:
        try:
            return cls(
                k=int(doc["k"]),
                m=int(doc["m"]),
                p=doc["p"],
                c=doc.get("c") or [[0] * int(doc["m"]) for _ in range(int(doc["k"]))],
                normalized=bool(doc.get("normalized", False)),
                scale=doc.get("scale", 1),
            )
        except KeyError as exc:
            raise StructuralError(f"instance file missing field {exc}") from exc


def normalize(inst: SchedulingInstance, scale=None) -> SchedulingInstance:
    """Divide processing times by ``scale`` (default: the largest one) so they lie in [0, 1]."""
    if scale is None:
        scale = max((v for row in inst.p for v in row), default=Fraction(1)) or Fraction(1)
    scale = to_fraction(scale)
    if scale <= 0:
        raise StructuralError("scale must be positive")
    p = [[v / scale for v in row] for row in inst.p]
    return SchedulingInstance(inst.k, inst.m, p, inst.c, normalized=True, scale=inst.scale * scale)


def denormalize(inst: SchedulingInstance, value: Extended) -> Extended:
    if isinstance(value, float):
        return value
    return value * inst.scale


@dataclass(frozen=True)
class Assignment:
    x: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        x = tuple(tuple(int(v) for v in row) for row in self.x)
        if len({len(r) for r in x}) > 1:
            raise StructuralError("ragged assignment")
        if any(v not in (0, 1) for row in x for v in row):
            raise StructuralError("assignment entries must be 0 or 1")
        object.__setattr__(self, "x", x)

    @classmethod
    def from_jobs(cls, k: int, jobs: Sequence[int | None]) -> Assignment:
        """``jobs[j]`` is the machine receiving job ``j``, or ``None`` to discard it."""
        x = [[0] * len(jobs) for _ in range(k)]
        for j, i in enumerate(jobs):
            if i is not None:
                x[i][j] = 1
        return cls(x)

    def jobs(self) -> list[int | None]:
        m = len(self.x[0]) if self.x else 0
        out: list[int | None] = [None] * m
        for i, row in enumerate(self.x):
            for j, v in enumerate(row):
                if v:
                    out[j] = i
        return out

    def to_fractional(self) -> FractionalAssignment:
        return FractionalAssignment(self.x)


@dataclass(frozen=True)
class FractionalAssignment:
    x: Matrix

    def __post_init__(self) -> None:
        x = _as_matrix(self.x)
        if any(v < 0 or v > 1 for row in x for v in row):
            raise StructuralError("fractional assignment entries must lie in [0, 1]")
        object.__setattr__(self, "x", x)

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for row in self.x for v in row)

    def to_assignment(self) -> Assignment:
        if not self.is_integral():
            raise StructuralError("assignment is fractional")
        return Assignment(tuple(tuple(int(v) for v in row) for row in self.x))


AnyAssignment = Union[Assignment, FractionalAssignment]


def _check(inst: SchedulingInstance, a: AnyAssignment):
    x = a.x
    if len(x) != inst.k or any(len(row) != inst.m for row in x):
        raise StructuralError(f"assignment shape does not match instance ({inst.k}x{inst.m})")
    return x


def loads(inst: SchedulingInstance, a: AnyAssignment) -> list[Fraction]:
    x = _check(inst, a)
    return [sum((inst.p[i][j] * x[i][j] for j in range(inst.m)), Fraction(0)) for i in range(inst.k)]


def column_sums(inst: SchedulingInstance, a: AnyAssignment) -> list[Fraction]:
    x = _check(inst, a)
    return [sum((Fraction(x[i][j]) for i in range(inst.k)), Fraction(0)) for j in range(inst.m)]


def makespan(inst: SchedulingInstance, a: AnyAssignment) -> Extended:
    if any(s != 1 for s in column_sums(inst, a)):
        return INF
    return max(loads(inst, a))


def fairness(inst: SchedulingInstance, a: AnyAssignment) -> Extended:
    if any(s > 1 for s in column_sums(inst, a)):
        return NEG_INF
    return min(loads(inst, a))


def cost(inst: SchedulingInstance, a: AnyAssignment) -> Fraction:
    x = _check(inst, a)
    return sum((inst.c[i][j] * x[i][j] for i in range(inst.k) for j in range(inst.m)), Fraction(0))


def modified_makespan(inst: SchedulingInstance, a: AnyAssignment) -> Extended:
    """Makespan, raised to the largest processing time carried with positive weight."""
    base = makespan(inst, a)
    if base == INF:
        return INF
    x = a.x
    used = [inst.p[i][j] for i in range(inst.k) for j in range(inst.m) if x[i][j] > 0]
    return max([base, *used])


def load_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise StructuralError(f"{path}: invalid JSON ({exc})") from exc


def dump_json(doc: dict, path: str | Path | None = None) -> str:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def read_instance(path: str | Path) -> SchedulingInstance:
    return SchedulingInstance.from_json(load_json(path))
