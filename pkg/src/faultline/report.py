"""Structured pass/fail reports shared by every runtime backend."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class Failure:
    path: str  # action path, e.g. "root[3].body[1]"
    code: str
    message: str
    observed: int | None = None
    expected: int | None = None
    time: int | None = None  # simulation time in half-steps
    sample: int | None = None  # sample index for constrained-random runs
    bindings: dict[str, int] | None = None

    def to_obj(self):
        obj = {"path": self.path, "code": self.code, "message": self.message}
        for key in ("observed", "expected", "time", "sample", "bindings"):
            v = getattr(self, key)
            if v is not None:
                obj[key] = v
        return obj


@dataclass
class TestReport:
    """Outcome of running a program: verdict plus per-failure diagnostics.

    verdict is "pass" iff there were no failures and no errors; "error" marks
    runs that could not complete (e.g. a runaway loop guard tripping).
    """

    failures: list[Failure] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    prints: str = ""
    seed: int | None = None
    action_counts: dict[str, int] = field(default_factory=dict)
    trace: list[dict] | None = None
    extra: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        if self.errors:
            return "error"
        return "fail" if self.failures else "pass"

    @property
    def ok(self) -> bool:
        return self.verdict == "pass"

    def to_obj(self) -> dict:
        obj = {
            "verdict": self.verdict,
            "failures": [f.to_obj() for f in self.failures],
            "errors": list(self.errors),
            "prints": self.prints,
            "seed": self.seed,
            "action_counts": dict(self.action_counts),
        }
        if self.trace is not None:
            obj["trace"] = self.trace
        obj.update(self.extra)
        return obj

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=True, separators=(",", ":"))


# JSON Schema for serialized reports; tests and downstream tooling validate
# against this.
REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["verdict", "failures", "errors", "prints", "seed", "action_counts"],
    "properties": {
        "verdict": {"enum": ["pass", "fail", "error"]},
        "failures": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["path", "code", "message"],
                "properties": {
                    "path": {"type": "string"},
                    "code": {"type": "string"},
                    "message": {"type": "string"},
                    "observed": {"type": "integer"},
                    "expected": {"type": "integer"},
                    "time": {"type": "integer"},
                    "sample": {"type": "integer"},
                    "bindings": {"type": "object", "additionalProperties": {"type": "integer"}},
                },
            },
        },
        "errors": {"type": "array", "items": {"type": "string"}},
        "prints": {"type": "string"},
        "seed": {"type": ["integer", "null"]},
        "action_counts": {"type": "object", "additionalProperties": {"type": "integer"}},
        "trace": {"type": "array"},
    },
}
