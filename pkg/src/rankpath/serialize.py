"""Wire formats: matrix/descriptor/path JSON codecs and deterministic output.

Every file this package writes is newline-terminated UTF-8 with numbers
rendered at 17 significant digits, so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import math

import numpy as np

from .numkernel import ScalarField, as_matrix
from .oracles import OracleConfig
from .paths import BranchKind, BranchTag, PathCertificate, PiecewisePath
from .variety import VarietyDescriptor


def format_number(value: float) -> str:
    if isinstance(value, float) and (math.isnan(value) or math.isinf(value)):
        raise ValueError(f"{value} is not representable in JSON")
    return format(value, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """Serialize dicts/lists/scalars deterministically (insertion order kept)."""
    pad = " " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_number(float(obj))
    if isinstance(obj, str):
        escaped = (
            obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        )
        return f'"{escaped}"'
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(
            f'{pad}  "{key}": {dumps(value, indent + 2)}' for key, value in obj.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = ",\n".join(f"{pad}  {dumps(item, indent + 2)}" for item in obj)
        return "[\n" + inner + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(dumps(obj))
        handle.write("\n")


def write_csv(header: str, rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(header + "\n")
        for row in rows:
            handle.write(",".join(row) + "\n")


def matrix_to_json(a: np.ndarray) -> dict:
    a = as_matrix(a)
    if a.ndim != 2:
        raise ValueError("matrix JSON encodes 2-d arrays")
    if np.iscomplexobj(a):
        entries = [[float(z.real), float(z.imag)] for z in a.reshape(-1)]
        field = ScalarField.COMPLEX
    else:
        entries = [float(x) for x in a.reshape(-1)]
        field = ScalarField.REAL
    return {
        "m": a.shape[0],
        "n": a.shape[1],
        "field": field.value,
        "entries": entries,
    }


def matrix_from_json(data: dict) -> np.ndarray:
    m, n = int(data["m"]), int(data["n"])
    field = ScalarField(data["field"])
    entries = data["entries"]
    if len(entries) != m * n:
        raise ValueError(f"expected {m * n} entries, got {len(entries)}")
    if field is ScalarField.COMPLEX:
        values = [complex(re, im) for re, im in entries]
    else:
        values = [float(x) for x in entries]
    return np.array(values, dtype=field.dtype).reshape(m, n)


def descriptor_to_json(d: VarietyDescriptor) -> dict:
    return {"m": d.m, "n": d.n, "t": d.t, "field": d.field.value}


def descriptor_from_json(data: dict) -> VarietyDescriptor:
    return VarietyDescriptor(
        int(data["m"]), int(data["n"]), int(data["t"]), ScalarField(data["field"])
    )


def branch_trace_to_json(trace: tuple[BranchTag, ...]) -> list:
    return [{"kind": tag.kind.value, "depth": tag.depth} for tag in trace]


def branch_trace_from_json(data) -> tuple[BranchTag, ...]:
    return tuple(BranchTag(BranchKind(item["kind"]), int(item["depth"])) for item in data)


def certificate_to_json(cert: PathCertificate) -> dict:
    return {
        "outer_distance": cert.outer_distance,
        "length": cert.length,
        "ratio": cert.ratio,
        "certified_bound": cert.certified_bound,
        "branch_trace": branch_trace_to_json(cert.branch_trace),
        "max_relative_residual": cert.max_relative_residual,
        "samples_per_segment": cert.samples_per_segment,
    }


def path_to_json(
    d: VarietyDescriptor, path: PiecewisePath, cert: PathCertificate
) -> dict:
    return {
        "descriptor": descriptor_to_json(d),
        "breakpoints": [matrix_to_json(b) for b in path.breakpoints],
        "certificate": certificate_to_json(cert),
    }


def oracle_config_to_json(cfg: OracleConfig) -> dict:
    return {
        "n_samples": cfg.n_samples,
        "edge_membership_tol": cfg.edge_membership_tol,
        "midpoint_checks_per_edge": cfg.midpoint_checks_per_edge,
        "shorten_iterations": cfg.shorten_iterations,
        "seed": cfg.seed,
    }
