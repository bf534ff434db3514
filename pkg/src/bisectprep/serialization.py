"""Text, JSON and CSV forms of states, circuits and reports.

Reals are written with 17 significant digits so float64 values survive a
round trip unchanged.  Basis indices are most-significant-qubit first.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile

import numpy as np

from .errors import DomainError
from .statevector import CNOT, H, IQFT, MRY, ORACLE, QFT, RY, Circuit, Gate, Statevector

FORMAT_VERSION = "bisectprep/1"

_MNEMONIC = {H: "H", RY: "RY", CNOT: "CNOT", MRY: "MRY", ORACLE: "ORACLE", QFT: "QFT", IQFT: "IQFT"}
_KIND = {v: k for k, v in _MNEMONIC.items()}
STATE_COLUMNS = ("index", "bits", "real", "imag", "probability")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _ints(values) -> str:
    return ",".join(str(v) for v in values)


def circuit_to_text(circuit: Circuit) -> str:
    """One gate per line, e.g. ``MRY targets=2 controls=0,1 angles=...``."""
    lines = [f"# {FORMAT_VERSION} circuit qubits={circuit.num_qubits} order=msb-first"]
    for g in circuit.gates:
        parts = [_MNEMONIC[g.kind]]
        if g.target is not None:
            parts.append(f"targets={g.target}")
        if g.controls:
            parts.append(f"controls={_ints(g.controls)}")
        if g.angles:
            parts.append("angles=" + ",".join(fmt(a) for a in g.angles))
        if g.kind == ORACLE:
            parts.append(f"marked={_ints(sorted(g.marked))}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str) -> Circuit:
    num_qubits = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if token.startswith("qubits="):
                    num_qubits = int(token.split("=", 1)[1])
            continue
        head, *fields = line.split()
        if head not in _KIND:
            raise DomainError(f"line {lineno}: unknown gate {head!r}")
        kw = {}
        for f in fields:
            key, _, value = f.partition("=")
            kw[key] = [v for v in value.split(",") if v]
        gates.append(Gate(_KIND[head],
                          int(kw["targets"][0]) if "targets" in kw else None,
                          tuple(int(c) for c in kw.get("controls", ())),
                          tuple(float(a) for a in kw.get("angles", ())),
                          frozenset(int(m) for m in kw.get("marked", ()))))
    if num_qubits is None:
        raise DomainError("circuit text has no 'qubits=' header")
    return Circuit(num_qubits, gates)


def state_rows(state: Statevector, probabilities=None):
    n = state.num_qubits
    probs = state.probabilities() if probabilities is None else probabilities
    for i, (a, p) in enumerate(zip(state.amplitudes, probs)):
        yield i, format(i, f"0{n}b"), a.real, a.imag, p


def state_to_csv(state: Statevector, probabilities=None) -> str:
    """CSV rows ``index, bits, real, imag, probability``.

    ``probabilities`` overrides ``|a_i|^2`` when the exact masses are known.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(STATE_COLUMNS)
    for i, bits, re, im, p in state_rows(state, probabilities):
        writer.writerow([i, bits, fmt(re), fmt(im), fmt(p)])
    return buf.getvalue()


def state_to_dict(state: Statevector, probabilities=None) -> dict:
    return {"num_qubits": state.num_qubits, "qubit_order": "msb-first",
            "amplitudes": [{"index": i, "bits": bits, "real": float(fmt(re)),
                            "imag": float(fmt(im)), "probability": float(fmt(p))}
                           for i, bits, re, im, p in state_rows(state, probabilities)]}


def state_from_csv(text: str) -> Statevector:
    body = [line for line in text.splitlines() if not line.startswith("#")]
    rows = list(csv.DictReader(body))
    amps = np.array([complex(float(r["real"]), float(r["imag"])) for r in rows])
    n = len(rows[0]["bits"]) if rows else 0
    return Statevector(n, amps)


def table_to_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if v != v or v in (float("inf"), float("-inf")):
            return repr(v)
        return float(fmt(v))
    if isinstance(obj, (set, frozenset)):
        return sorted(_plain(v) for v in obj)
    return obj


def report_to_json(report: dict) -> str:
    return json.dumps(_plain(report), indent=2, sort_keys=True) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temp file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

