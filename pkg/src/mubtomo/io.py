"""JSON file formats for schemes, count data and reconstructions.

Complex matrices are stored as nested lists of ``[real, imag]`` pairs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .bases import MeasurementScheme
from .estimate import ReconstructionResult
from .simulate import CountData, normalize_model

FORMAT_VERSION = 1


class FormatError(ValueError):
    pass


def matrix_to_pairs(m) -> list:
    a = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def pairs_to_matrix(data) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"matrix is not a nested array of numbers: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise FormatError(f"expected a square nested array of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def scheme_to_dict(scheme: MeasurementScheme) -> dict:
    return {
        "format": "scheme",
        "version": FORMAT_VERSION,
        "scheme": scheme.name,
        "dim": scheme.dim,
        "num_qubits": scheme.num_qubits,
        "visibility": scheme.visibility,
        "bases": [
            {
                "index": b.index,
                "name": b.name,
                "entangled": b.entangled,
                "elements": [
                    {"label": e.label, "rank": e.rank, "matrix": matrix_to_pairs(e.matrix)} for e in b.elements
                ],
            }
            for b in scheme.bases
        ],
    }


def counts_to_dict(data: CountData, true_state=None) -> dict:
    out = {
        "format": "counts",
        "version": FORMAT_VERSION,
        "scheme": data.scheme,
        "visibility": data.visibility,
        "model": data.model,
        "seed": data.seed,
        "stream_id": data.stream_id,
        "n_total": data.n_total,
        "bases": [
            {"labels": list(data.labels[i]) if data.labels else [], "counts": [int(c) for c in row]}
            for i, row in enumerate(data.counts)
        ],
    }
    if true_state is not None:
        out["true_state"] = matrix_to_pairs(true_state)
    return out


def counts_from_dict(d: dict) -> tuple[CountData, np.ndarray | None]:
    """Parse a counts document; returns the data and the optional true state."""
    if not isinstance(d, dict) or d.get("format") != "counts":
        raise FormatError("not a counts file (missing 'format': 'counts')")
    try:
        bases = d["bases"]
        counts = np.array([b["counts"] for b in bases])
        labels = [list(b.get("labels", [])) for b in bases]
        data = CountData(
            scheme=str(d["scheme"]),
            counts=counts,
            n_total=int(d["n_total"]),
            model=normalize_model(d.get("model", "multinomial-exact")),
            seed=d.get("seed"),
            stream_id=d.get("stream_id"),
            visibility=float(d.get("visibility", 1.0)),
            labels=labels,
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed counts file: {exc!r}") from None
    except ValueError as exc:
        raise FormatError(f"malformed counts file: {exc}") from None
    if counts.dtype.kind not in "iu":
        raise FormatError("counts must be integers")
    truth = pairs_to_matrix(d["true_state"]) if d.get("true_state") is not None else None
    return data, truth


def result_to_dict(result: ReconstructionResult, **extra) -> dict:
    out = {
        "format": "reconstruction",
        "version": FORMAT_VERSION,
        "method": result.method,
        "rho_hat": matrix_to_pairs(result.rho_hat),
        "log_likelihood": result.log_likelihood,
        "iterations": result.iterations,
        "converged": result.converged,
    }
    out.update(extra)
    return out


def write_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
