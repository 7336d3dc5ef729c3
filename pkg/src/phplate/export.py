"""Plain-text artifacts: CSV traces, structured-grid snapshots and reports.

Every writer formats floats with ``repr``-equivalent precision (``%.17g``)
and iterates in a fixed order, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .integrate import SimulationTrace

FLOAT_FMT = "{:.17g}"


def fmt(v) -> str:
    return FLOAT_FMT.format(float(v))


def write_trace_csv(path, trace: SimulationTrace, dof_labels: Optional[Sequence[str]] = None,
                    include_ports: bool = True) -> Path:
    """Write a simulation trace, one row per time level.

    Columns: ``t [s]``, ``H_d [J]``, ``residual [-]``, then ``y:<port>`` and
    ``u:<port>`` for every port, then one column per recorded state component.
    Per-step quantities (residual, ports) refer to the step ending at that row
    and are evaluated at its midpoint; row 0 holds ``nan`` for them.
    """
    path = Path(path)
    labels = list(trace.port_labels) if include_ports else []
    if dof_labels is None:
        dof_labels = [f"x[{i}]" for i in trace.recorded]
    if len(dof_labels) != trace.states.shape[1]:
        raise ValueError("one label per recorded state component is required")
    header = ["t [s]", "H_d [J]", "residual [-]"]
    header += [f"y:{lab}" for lab in labels] + [f"u:{lab}" for lab in labels]
    header += list(dof_labels)
    n_ports = len(labels)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k in range(trace.n_steps + 1):
            if k == 0:
                step = ["nan"] * (1 + 2 * n_ports)
            else:
                step = [fmt(trace.residual[k - 1])]
                if n_ports:
                    step += [fmt(v) for v in trace.y[k - 1]] + [fmt(v) for v in trace.u[k - 1]]
            row = [fmt(trace.t[k]), fmt(trace.H[k])] + step + [fmt(v) for v in trace.states[k]]
            w.writerow(row)
    return path


def read_trace_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and numeric body of a trace written by :func:`write_trace_csv`."""
    with Path(path).open() as fh:
        header = next(csv.reader(fh))
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def write_grid_snapshot(path, x_coords, y_coords, fields: Mapping[str, np.ndarray],
                        time: Optional[float] = None) -> Path:
    """Structured-grid text snapshot.

    Layout::

        # phplate structured grid
        # time <t>                      (only when given)
        nx <nx>
        ny <ny>
        fields <name> <name> ...
        x <nx values>
        y <ny values>
        <one line per node, x fastest: the field values in the listed order>

    Each field array has shape ``(ny, nx)`` (or ``(nx,)`` when ``ny == 1``).
    """
    path = Path(path)
    xs = np.asarray(x_coords, dtype=float).reshape(-1)
    ys = np.asarray(y_coords, dtype=float).reshape(-1)
    names = list(fields)
    arrays = []
    for name in names:
        a = np.asarray(fields[name], dtype=float).reshape(ys.size, xs.size)
        arrays.append(a.ravel())
    lines = ["# phplate structured grid"]
    if time is not None:
        lines.append(f"# time {fmt(time)}")
    lines += [f"nx {xs.size}", f"ny {ys.size}", "fields " + " ".join(names),
              "x " + " ".join(fmt(v) for v in xs), "y " + " ".join(fmt(v) for v in ys)]
    stacked = np.column_stack(arrays) if arrays else np.zeros((xs.size * ys.size, 0))
    lines += [" ".join(fmt(v) for v in row) for row in stacked]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_grid_snapshot(path) -> dict:
    """Parse a snapshot back into ``{'x', 'y', 'time', <field>: (ny, nx) array}``."""
    out: dict = {"time": None}
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# time"):
            out["time"] = float(line.split()[2])
        elif line.startswith("#") or not line.strip():
            continue
        else:
            key, *rest = line.split()
            if key in ("nx", "ny"):
                out[key] = int(rest[0])
            elif key == "fields":
                out["fields"] = rest
            elif key in ("x", "y"):
                out[key] = np.array([float(v) for v in rest])
            else:
                rows.append([float(v) for v in line.split()])
    data = np.array(rows).reshape(out["ny"] * out["nx"], len(out["fields"]))
    for k, name in enumerate(out["fields"]):
        out[name] = data[:, k].reshape(out["ny"], out["nx"])
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    return obj


def write_json_report(path, report: Mapping) -> Path:
    """Sorted-key JSON; non-finite floats are written as strings."""
    path = Path(path)
    path.write_text(json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n")
    return path


def write_eigen_report(path, omega, oracle=None, title: str = "") -> Path:
    """Tab-separated eigenfrequency table with units in the header.

    Columns: ``mode``, ``omega [rad/s]``, ``f [Hz]``, ``omega_ref [rad/s]`` and
    ``rel_error [-]``; the last two are ``nan`` when no closed form exists.
    """
    path = Path(path)
    omega = np.asarray(omega, dtype=float)
    ref = np.full(omega.shape, np.nan) if oracle is None else np.asarray(oracle, dtype=float)
    lines = []
    if title:
        lines.append(f"# {title}")
    lines.append("mode\tomega [rad/s]\tf [Hz]\tomega_ref [rad/s]\trel_error [-]")
    for k, w in enumerate(omega):
        r = ref[k] if k < ref.size else np.nan
        err = abs(w - r) / r if np.isfinite(r) and r != 0 else np.nan
        lines.append("\t".join([str(k + 1), fmt(w), fmt(w / (2 * np.pi)), fmt(r), fmt(err)]))
    path.write_text("\n".join(lines) + "\n")
    return path
