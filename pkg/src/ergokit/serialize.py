"""JSON/CSV wire formats for matrices, grids, kernels, geometric states, and
reports.

Matrices travel as ``{"dim": d, "entries": [[re, im], ...]}`` with the entries
flattened row-major.  Grid tables are CSV rows ``index,energy_a,energy_b,weight``
(or the equivalent JSON object).  Floats in emitted reports are rounded to 12
significant digits so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, is_dataclass
from typing import Any

import numpy as np

from .classical import GridDistribution, JointDistribution, PhaseGrid, TransitionKernel
from .geometric import GeometricPoint, GeometricState
from .quantum import DensityMatrix, HermitianOperator


def matrix_to_json(matrix: np.ndarray) -> dict:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    flat = m.reshape(-1)
    return {"dim": int(m.shape[0]), "entries": [[float(z.real), float(z.imag)] for z in flat]}


def matrix_from_json(obj: dict) -> np.ndarray:
    dim = int(obj["dim"])
    entries = obj["entries"]
    if len(entries) != dim * dim:
        raise ValueError(f"expected {dim * dim} entries, got {len(entries)}")
    flat = np.array([complex(re, im) for re, im in entries])
    return flat.reshape(dim, dim)


def hermitian_from_json(obj: dict) -> HermitianOperator:
    return HermitianOperator(matrix_from_json(obj))


def density_from_json(obj: dict) -> DensityMatrix:
    return DensityMatrix(matrix_from_json(obj))


def kernel_to_json(kernel: TransitionKernel) -> dict:
    return {"n": kernel.n_cells, "matrix": [[float(x) for x in row] for row in kernel.matrix]}


def kernel_from_json(obj: dict) -> TransitionKernel:
    return TransitionKernel(np.array(obj["matrix"], dtype=float))


def joint_to_json(joint: JointDistribution) -> dict:
    return {"n": joint.n_cells, "matrix": [[float(x) for x in row] for row in joint.matrix]}


def grid_to_json(grid: PhaseGrid, weights: GridDistribution) -> dict:
    return {
        "cell_volume": float(grid.cell_volume),
        "energy_a": [float(x) for x in grid.energy_a],
        "energy_b": [float(x) for x in grid.energy_b],
        "weights": [float(x) for x in weights.weights],
    }


def grid_from_json(obj: dict) -> tuple[PhaseGrid, GridDistribution]:
    grid = PhaseGrid(
        energy_a=np.array(obj["energy_a"], dtype=float),
        energy_b=np.array(obj["energy_b"], dtype=float),
        cell_volume=float(obj.get("cell_volume", 1.0)),
    )
    return grid, GridDistribution(np.array(obj["weights"], dtype=float))


GRID_CSV_COLUMNS = ("index", "energy_a", "energy_b", "weight")


def grid_to_csv(grid: PhaseGrid, weights: GridDistribution) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(GRID_CSV_COLUMNS)
    for i in range(grid.n_cells):
        writer.writerow(
            [i, format_float(grid.energy_a[i]), format_float(grid.energy_b[i]),
             format_float(weights.weights[i])]
        )
    return buf.getvalue()


def grid_from_csv(text: str) -> tuple[PhaseGrid, GridDistribution]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(h.strip() for h in header) != GRID_CSV_COLUMNS:
        raise ValueError(f"expected header {GRID_CSV_COLUMNS}, got {header}")
    rows = sorted((int(r[0]), float(r[1]), float(r[2]), float(r[3])) for r in reader if r)
    if not rows:
        raise ValueError("grid CSV has no rows")
    grid = PhaseGrid(
        energy_a=np.array([r[1] for r in rows]),
        energy_b=np.array([r[2] for r in rows]),
    )
    return grid, GridDistribution(np.array([r[3] for r in rows]))


def geometric_state_to_json(state: GeometricState) -> dict:
    return {
        "points": [
            {
                "weight": float(w),
                "amplitudes": [[float(z.real), float(z.imag)] for z in p.amplitudes],
            }
            for w, p in zip(state.weights, state.points)
        ]
    }


def geometric_state_from_json(obj: dict) -> GeometricState:
    points = []
    weights = []
    for item in obj["points"]:
        weights.append(float(item["weight"]))
        points.append(GeometricPoint(np.array([complex(re, im) for re, im in item["amplitudes"]])))
    return GeometricState(points=tuple(points), weights=np.array(weights))


def format_float(x: float) -> str:
    """12-significant-digit decimal form used in all emitted tables."""
    return f"{float(x):.12g}"


def round_floats(obj: Any) -> Any:
    """Recursively round floats to 12 significant digits for stable JSON bytes."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return round_floats(asdict(obj))
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [round_floats(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return float(format_float(float(obj)))
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return obj
