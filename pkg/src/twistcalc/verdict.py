"""Outcome records for the identity checks."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Verdict:
    """Result of checking one identity.

    ``first_failing_order`` is the lowest power of ``h`` at which the two
    sides disagree; ``sample`` renders the input that exposed it.
    """

    passed: bool
    first_failing_order: int | None = None
    sample: str | None = None
    detail: str = ""

    def __post_init__(self):
        if self.passed and self.first_failing_order is not None:
            raise ValueError("a passing verdict cannot carry a failing order")

    def __bool__(self):
        return self.passed

    @classmethod
    def ok(cls, detail: str = "") -> "Verdict":
        return cls(True, None, None, detail)

    @classmethod
    def fail(cls, order: int | None, sample: str | None = None, detail: str = "") -> "Verdict":
        return cls(False, order, sample, detail)


def combine(verdicts) -> Verdict:
    """First failure wins; otherwise pass (long detail lists are summarized)."""
    details = []
    count = 0
    for v in verdicts:
        if not v.passed:
            return v
        count += 1
        if v.detail:
            details.append(v.detail)
    if len(details) > 3:
        return Verdict.ok(f"{count} sub-checks passed")
    return Verdict.ok("; ".join(details))


class Collector:
    """Accumulates difference checks and keeps the earliest failure.

    ``diff`` is a sparse ``{(key, k): c}`` dictionary; any nonzero entry is a
    failure whose order is the smallest ``k``.
    """

    def __init__(self):
        self.failure: Verdict | None = None
        self.count = 0

    def record(self, diff: dict, sample) -> bool:
        self.count += 1
        nz = [key[-1] for key, v in diff.items() if v]
        if not nz:
            return True
        order = min(nz)
        if self.failure is None or order < self.failure.first_failing_order:
            self.failure = Verdict.fail(order, str(sample))
        return False

    def verdict(self, detail: str = "") -> Verdict:
        if self.failure is not None:
            return Verdict(False, self.failure.first_failing_order, self.failure.sample, detail)
        return Verdict.ok(detail or f"{self.count} samples")
