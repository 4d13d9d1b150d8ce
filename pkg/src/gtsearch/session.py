"""Defect oracle, stage-disciplined sessions and exhaustive verification.

Strategies talk to a :class:`Session`. Pools of one stage are submitted
first; reading the outcomes seals the stage, after which no more pools may
join it. :meth:`Session.run_stage` wraps the open/submit/read cycle.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .codes import ConcatParams, DefectSet
from .errors import BudgetExceeded, GroupTestingError, ProtocolViolation


@dataclass(frozen=True)
class Oracle:
    """Hidden defect set answering pool tests."""

    t: int
    defects: frozenset[int]

    def __init__(self, t: int, defects: Iterable[int]):
        defects = frozenset(defects)
        if any(not 0 <= d < t for d in defects):
            raise ValueError(f"defects {sorted(defects)} outside [0, {t})")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "defects", defects)

    def answer(self, pool: Iterable[int]) -> int:
        hit = 0
        for j in pool:
            if not 0 <= j < self.t:
                raise ValueError(f"pool item {j} outside [0, {self.t})")
            if j in self.defects:
                hit = 1
        return hit


@dataclass
class Stage:
    pools: list[list[int]]
    outcomes: list[int]

    def to_dict(self) -> dict:
        return {"pools": [list(p) for p in self.pools], "outcomes": list(self.outcomes)}


@dataclass
class Transcript:
    t: int
    stages: list[Stage]
    diagnosis: DefectSet
    params: ConcatParams | None = None

    @property
    def n_tests(self) -> int:
        return sum(len(stage.pools) for stage in self.stages)

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    def tests_per_stage(self) -> list[int]:
        return [len(stage.pools) for stage in self.stages]

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "params": self.params.to_dict() if self.params else None,
            "stages": [stage.to_dict() for stage in self.stages],
            "diagnosis": list(self.diagnosis),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "Transcript":
        params = ConcatParams.from_dict(data["params"]) if data.get("params") else None
        stages = [Stage([list(p) for p in s["pools"]], list(s["outcomes"])) for s in data["stages"]]
        return cls(data["t"], stages, tuple(data["diagnosis"]), params)

    @classmethod
    def from_json(cls, text: str) -> "Transcript":
        return cls.from_dict(json.loads(text))


class Session:
    """One sequential run of a strategy against an oracle."""

    def __init__(self, oracle: Oracle):
        self._oracle = oracle
        self.stages: list[Stage] = []
        self._open: list[list[int]] | None = None
        self._sealed = False

    @property
    def t(self) -> int:
        return self._oracle.t

    def open_stage(self) -> None:
        if self._open is not None and not self._sealed:
            raise ProtocolViolation("previous stage was never read")
        self._open = []
        self._sealed = False

    def submit(self, pool: Iterable[int]) -> None:
        if self._open is None:
            raise ProtocolViolation("no open stage")
        if self._sealed:
            raise ProtocolViolation("stage outcomes already read; open a new stage")
        pool = sorted(set(pool))
        if any(not 0 <= j < self.t for j in pool):
            raise ValueError(f"pool {pool} not inside [0, {self.t})")
        self._open.append(pool)

    def read(self) -> list[int]:
        """Seal the open stage and return all of its outcomes at once."""
        if self._open is None or self._sealed:
            raise ProtocolViolation("no unread stage")
        self._sealed = True
        pools = self._open
        outcomes = [self._oracle.answer(p) for p in pools]
        if pools:
            self.stages.append(Stage(pools, outcomes))
        return outcomes

    def run_stage(self, pools: Sequence[Iterable[int]]) -> list[int]:
        """Issue ``pools`` as one stage; empty stages are not recorded."""
        self.open_stage()
        for pool in pools:
            self.submit(pool)
        return self.read()

    def finish(self, diagnosis: Iterable[int], params: ConcatParams | None = None) -> Transcript:
        return Transcript(self.t, list(self.stages), tuple(sorted(diagnosis)), params)


Strategy = Callable[[Session], Transcript]


def run_session(strategy: Strategy, oracle: Oracle) -> Transcript:
    return strategy(Session(oracle))


def check_unique_consistency(transcript: Transcript, t: int, s: int) -> bool:
    """True iff the diagnosis is the only set of size <= s matching every outcome."""
    pools = []
    for stage in transcript.stages:
        for pool, bit in zip(stage.pools, stage.outcomes):
            pools.append((sum(1 << j for j in pool), bit))
    consistent = []
    for k in range(s + 1):
        for combo in itertools.combinations(range(t), k):
            mask = sum(1 << j for j in combo)
            if all(bool(mask & pm) == bool(bit) for pm, bit in pools):
                consistent.append(combo)
                if len(consistent) > 1:
                    return False
    return consistent == [tuple(transcript.diagnosis)]


@dataclass
class VerificationReport:
    t: int
    s: int
    cases: int = 0
    failures: list[tuple[DefectSet, DefectSet | None]] = field(default_factory=list)
    max_tests: int = 0
    max_stages: int = 0
    histogram: Counter = field(default_factory=Counter)

    @property
    def ok(self) -> bool:
        return not self.failures

    def merge(self, other: "VerificationReport") -> None:
        self.cases += other.cases
        self.failures.extend(other.failures)
        self.max_tests = max(self.max_tests, other.max_tests)
        self.max_stages = max(self.max_stages, other.max_stages)
        self.histogram.update(other.histogram)

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "s": self.s,
            "cases": self.cases,
            "failures": [
                {"defects": list(d), "diagnosis": None if g is None else list(g)}
                for d, g in self.failures
            ],
            "max_tests": self.max_tests,
            "max_stages": self.max_stages,
            "histogram": {str(k): self.histogram[k] for k in sorted(self.histogram)},
        }


def defect_sets(t: int, s: int) -> Iterable[DefectSet]:
    for k in range(s + 1):
        yield from itertools.combinations(range(t), k)


def count_defect_sets(t: int, s: int) -> int:
    return sum(math.comb(t, k) for k in range(s + 1))


def _verify_chunk(t: int, s: int, factory: Callable[[], Strategy], cases: list[DefectSet]):
    report = VerificationReport(t, s)
    for defects in cases:
        report.cases += 1
        try:
            transcript = run_session(factory(), Oracle(t, defects))
        except GroupTestingError:
            report.failures.append((defects, None))
            continue
        if transcript.diagnosis != defects:
            report.failures.append((defects, transcript.diagnosis))
        report.max_tests = max(report.max_tests, transcript.n_tests)
        report.max_stages = max(report.max_stages, transcript.n_stages)
        report.histogram[transcript.n_tests] += 1
    return report


def verify_exhaustive(
    t: int,
    s: int,
    factory: Callable[[], Strategy],
    budget: int = 1_000_000,
    jobs: int = 1,
) -> VerificationReport:
    """Run a fresh strategy on every defect set of size <= s.

    ``factory`` must be picklable when ``jobs > 1``.
    """
    required = count_defect_sets(t, s)
    if required > budget:
        raise BudgetExceeded(required, budget)
    cases = list(defect_sets(t, s))
    report = VerificationReport(t, s)
    if jobs <= 1 or len(cases) < 2 * jobs:
        report.merge(_verify_chunk(t, s, factory, cases))
    else:
        size = math.ceil(len(cases) / jobs)
        chunks = [cases[i : i + size] for i in range(0, len(cases), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_verify_chunk, *zip(*[(t, s, factory, c) for c in chunks])):
                report.merge(part)
    report.failures.sort(key=lambda f: (len(f[0]), f[0]))
    return report
