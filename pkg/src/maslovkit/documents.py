"""Schema-versioned JSON documents for system input and report output.

Both directions use canonical serialization (sorted keys, minimal
separators, trailing newline) so the same computation always produces
byte-identical files; reports embed a sha256 digest of the canonical
input so a report can be matched to exactly the system it describes.
Unknown fields are rejected, not ignored: a typo'd field must fail
loudly rather than silently change the system.
"""

import hashlib
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SchemaError
from .paths import HamiltonianDescriptor

SCHEMA_VERSION = "1"


def canonical_json(payload):
    """Canonical text form: sorted keys, no spaces, newline-terminated."""
    return (
        json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)
        + "\n"
    )


def payload_digest(payload):
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def _as_matrix(rows, what):
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{what} is not a numeric matrix: {exc}") from None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise SchemaError(f"{what} must be a square matrix, got shape {arr.shape}")
    return arr


def _listify(mat):
    return [[float(x) for x in row] for row in np.asarray(mat)]


_SYSTEM_KEYS = {"schema_version", "n", "tau", "kind", "data", "label"}
_DATA_KEYS = {
    "constant": {"B"},
    "piecewise-constant": {"breaks", "blocks"},
    "trig-polynomial": {"constant", "cos", "sin"},
}


@dataclass(frozen=True)
class SystemDocument:
    """One linear Hamiltonian system as a JSON-portable document."""

    n: int
    tau: float
    kind: str
    data: dict
    label: Optional[str] = None
    schema_version: str = SCHEMA_VERSION

    @classmethod
    def from_descriptor(cls, descriptor, label=None):
        kind = descriptor.kind
        if kind == "constant":
            data = {"B": _listify(descriptor.blocks[0])}
        elif kind == "piecewise-constant":
            data = {
                "breaks": [float(b) for b in descriptor.breaks],
                "blocks": [_listify(B) for B in descriptor.blocks],
            }
        else:
            C0, cos_t, sin_t = descriptor.blocks
            data = {
                "constant": _listify(C0),
                "cos": [[int(k), _listify(C)] for k, C in cos_t],
                "sin": [[int(k), _listify(S)] for k, S in sin_t],
            }
        return cls(
            n=descriptor.n,
            tau=float(descriptor.tau),
            kind=kind,
            data=data,
            label=label,
        )

    def to_descriptor(self):
        """Rebuild the HamiltonianDescriptor; validates as it goes."""
        if self.kind == "constant":
            B = _as_matrix(self.data["B"], "B")
            desc = HamiltonianDescriptor.constant(B, self.tau)
        elif self.kind == "piecewise-constant":
            blocks = [
                _as_matrix(b, f"block {i}")
                for i, b in enumerate(self.data["blocks"])
            ]
            desc = HamiltonianDescriptor.piecewise(
                blocks, [float(b) for b in self.data["breaks"]], self.tau
            )
        elif self.kind == "trig-polynomial":
            desc = HamiltonianDescriptor.trig_polynomial(
                _as_matrix(self.data["constant"], "constant term"),
                [(int(k), _as_matrix(C, f"cos {k}")) for k, C in self.data["cos"]],
                [(int(k), _as_matrix(S, f"sin {k}")) for k, S in self.data["sin"]],
                self.tau,
            )
        else:
            raise SchemaError(f"unknown system kind {self.kind!r}")
        if desc.n != self.n:
            raise SchemaError(
                f"declared n={self.n} but matrices have n={desc.n}"
            )
        return desc

    def to_payload(self):
        payload = {
            "schema_version": self.schema_version,
            "n": int(self.n),
            "tau": float(self.tau),
            "kind": self.kind,
            "data": self.data,
        }
        if self.label is not None:
            payload["label"] = self.label
        return payload

    @classmethod
    def from_payload(cls, payload):
        if not isinstance(payload, dict):
            raise SchemaError("system document must be a JSON object")
        unknown = set(payload) - _SYSTEM_KEYS
        if unknown:
            raise SchemaError(f"unknown system fields: {sorted(unknown)}")
        for required in ("schema_version", "n", "tau", "kind", "data"):
            if required not in payload:
                raise SchemaError(f"missing system field {required!r}")
        if payload["schema_version"] != SCHEMA_VERSION:
            raise SchemaError(
                f"unsupported schema_version {payload['schema_version']!r}"
            )
        kind = payload["kind"]
        if kind not in _DATA_KEYS:
            raise SchemaError(f"unknown system kind {kind!r}")
        data = payload["data"]
        if not isinstance(data, dict):
            raise SchemaError("data must be a JSON object")
        unknown = set(data) - _DATA_KEYS[kind]
        if unknown:
            raise SchemaError(f"unknown data fields for {kind}: {sorted(unknown)}")
        missing = _DATA_KEYS[kind] - set(data)
        if missing:
            raise SchemaError(f"missing data fields for {kind}: {sorted(missing)}")
        doc = cls(
            n=int(payload["n"]),
            tau=float(payload["tau"]),
            kind=kind,
            data=data,
            label=payload.get("label"),
        )
        doc.to_descriptor()  # reject anything that does not build
        return doc

    def dumps(self):
        return canonical_json(self.to_payload())

    @classmethod
    def loads(cls, text):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from None
        return cls.from_payload(payload)

    @property
    def digest(self):
        return payload_digest(self.to_payload())


_REPORT_KEYS = {
    "schema_version",
    "command",
    "seed",
    "inputs",
    "results",
    "wall_clock",
}


@dataclass(frozen=True)
class ReportDocument:
    """Structured result of one CLI invocation.

    ``results`` holds the command-specific sections (per-omega values,
    per-m tables, splitting data, jump tuples, oracle flags); every index
    stored there is a plain integer and every pass flag travels with the
    operand values that justify it.  ``wall_clock`` stays None unless
    timing was requested, so default reports are byte-reproducible.
    """

    command: str
    inputs: tuple
    results: dict
    seed: Optional[int] = None
    wall_clock: Optional[float] = None
    schema_version: str = SCHEMA_VERSION

    def to_payload(self):
        return {
            "schema_version": self.schema_version,
            "command": self.command,
            "seed": self.seed,
            "inputs": list(self.inputs),
            "results": self.results,
            "wall_clock": self.wall_clock,
        }

    @classmethod
    def from_payload(cls, payload):
        if not isinstance(payload, dict):
            raise SchemaError("report document must be a JSON object")
        unknown = set(payload) - _REPORT_KEYS
        if unknown:
            raise SchemaError(f"unknown report fields: {sorted(unknown)}")
        missing = _REPORT_KEYS - set(payload)
        if missing:
            raise SchemaError(f"missing report fields: {sorted(missing)}")
        if payload["schema_version"] != SCHEMA_VERSION:
            raise SchemaError(
                f"unsupported schema_version {payload['schema_version']!r}"
            )
        return cls(
            command=payload["command"],
            inputs=tuple(payload["inputs"]),
            results=payload["results"],
            seed=payload["seed"],
            wall_clock=payload["wall_clock"],
        )

    def dumps(self):
        return canonical_json(self.to_payload())

    @classmethod
    def loads(cls, text):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from None
        return cls.from_payload(payload)
