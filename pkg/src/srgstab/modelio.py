"""File formats: model JSON, network JSON, report JSON, margin and boundary
CSV exports, and run provenance.

Model JSON kinds:
  {"kind": "state_space", "A": [[..]], "B": [[..]], "C": [[..]], "D": [[..]]}
  {"kind": "rational", "num": [[[coeffs..]..]..], "den": [[[coeffs..]..]..]}
      (coefficients in descending powers of s)
  {"kind": "samples", "csv": "sweep.csv"}            (path relative to the JSON)
  {"kind": "samples", "f_hz": [..], "matrices": [[[ [re, im], ..] ..] ..]}
Optional keys on any kind: "label" (text) and "theta" (radians; wraps the
model as J(theta) * G * J(-theta) for 2x2 models).

Network JSON (1-based bus numbers):
  {"n_bus": n, "f0_hz": 50, "boundary": [1, ..],
   "branches": [{"from": 1, "to": 2, "R": .., "L": ..} |
                {"from": 1, "to": 2, "block": [[[re, im], ..], ..]}],
   "shunts":   [{"bus": 3, "R": .., "L": ..} | {"bus": 3, "block": ..}]}

All floats are serialized with full round-trip precision (17 significant
digits) so regeneration of a report is byte-stable.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .criteria import CertificationReport, CscrResult
from .gridmodels import (
    Branch,
    DataFormatError,
    NetworkCase,
    Shunt,
    load_frequency_data,
)
from .lti import (
    FrequencyGrid,
    RationalModel,
    RotatedModel,
    SampledModel,
    StateSpaceModel,
    TransferMatrixModel,
)


class ModelFormatError(ValueError):
    pass


def _require(doc: dict, key: str, path) -> object:
    if key not in doc:
        raise ModelFormatError(f"{path}: missing field '{key}'")
    return doc[key]


def _complex_matrix(entry, path, where: str) -> np.ndarray:
    try:
        arr = np.asarray(entry, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: {where} is not numeric") from exc
    if arr.ndim != 3 or arr.shape[-1] != 2 or arr.shape[0] != arr.shape[1]:
        raise ModelFormatError(
            f"{path}: {where} must be an n x n array of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def load_model(path) -> TransferMatrixModel:
    """Load a transfer-matrix model from a JSON document."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ModelFormatError(f"{path}: cannot read ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError(f"{path}: top level must be an object")
    return model_from_dict(doc, base_dir=path.parent, context=str(path))


def model_from_dict(doc: dict, base_dir=None,
                    context: str = "<model>") -> TransferMatrixModel:
    """Build a transfer-matrix model from a decoded model document."""
    path = context
    kind = _require(doc, "kind", path)
    try:
        if kind == "state_space":
            model: TransferMatrixModel = StateSpaceModel(
                A=np.asarray(_require(doc, "A", path), dtype=float),
                B=np.asarray(_require(doc, "B", path), dtype=float),
                C=np.asarray(_require(doc, "C", path), dtype=float),
                D=np.asarray(_require(doc, "D", path), dtype=float),
            )
        elif kind == "rational":
            num = _require(doc, "num", path)
            den = _require(doc, "den", path)
            model = RationalModel(
                num=tuple(tuple(np.asarray(c, dtype=float) for c in row) for row in num),
                den=tuple(tuple(np.asarray(c, dtype=float) for c in row) for row in den),
            )
        elif kind == "samples":
            if "csv" in doc:
                if base_dir is None:
                    raise ModelFormatError(
                        f"{path}: csv references are only valid in file-loaded models")
                data = load_frequency_data(Path(base_dir) / doc["csv"],
                                           label=doc.get("label", ""))
                model = data.to_model()
            else:
                f_hz = np.asarray(_require(doc, "f_hz", path), dtype=float)
                mats = np.stack([
                    _complex_matrix(m, path, f"matrices[{k}]")
                    for k, m in enumerate(_require(doc, "matrices", path))
                ])
                model = SampledModel(omegas=2 * np.pi * f_hz, matrices=mats,
                                     label=doc.get("label", ""))
        else:
            raise ModelFormatError(f"{path}: unknown kind {kind!r}")
    except ModelFormatError:
        raise
    except (TypeError, ValueError, DataFormatError) as exc:
        raise ModelFormatError(f"{path}: {exc}") from exc
    theta = doc.get("theta", 0.0)
    if theta:
        try:
            model = RotatedModel(base=model, theta=float(theta))
        except (TypeError, ValueError) as exc:
            raise ModelFormatError(f"{path}: field 'theta': {exc}") from exc
    return model


def load_network(path) -> NetworkCase:
    """Load a network case (1-based bus numbers in the file)."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ModelFormatError(f"{path}: cannot read ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: invalid JSON ({exc})") from exc
    n_bus = int(_require(doc, "n_bus", path))
    omega0 = 2 * np.pi * float(doc.get("f0_hz", 50.0))

    def block_of(entry: dict, where: str):
        if "block" in entry:
            return _complex_matrix(entry["block"], path, f"{where}.block")
        return None

    branches = []
    for k, b in enumerate(_require(doc, "branches", path)):
        where = f"branches[{k}]"
        try:
            branches.append(Branch(
                from_bus=int(_require(b, "from", path)) - 1,
                to_bus=int(_require(b, "to", path)) - 1,
                R=float(b.get("R", 0.0)), L=float(b.get("L", 0.0)),
                block=block_of(b, where),
            ))
        except (TypeError, ValueError) as exc:
            raise ModelFormatError(f"{path}: {where}: {exc}") from exc
    shunts = []
    for k, s in enumerate(doc.get("shunts", [])):
        where = f"shunts[{k}]"
        try:
            shunts.append(Shunt(
                bus=int(_require(s, "bus", path)) - 1,
                R=float(s.get("R", 0.0)), L=float(s.get("L", 0.0)),
                block=block_of(s, where),
            ))
        except (TypeError, ValueError) as exc:
            raise ModelFormatError(f"{path}: {where}: {exc}") from exc
    boundary = tuple(int(b) - 1 for b in _require(doc, "boundary", path))
    try:
        return NetworkCase(n_bus=n_bus, branches=tuple(branches),
                           shunts=tuple(shunts), boundary=boundary, omega0=omega0)
    except ValueError as exc:
        raise ModelFormatError(f"{path}: {exc}") from exc


def file_sha256(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def provenance(input_paths: dict, grid: FrequencyGrid, seed: int = 0,
               extra: dict | None = None) -> dict:
    out = {
        "tool": "srgstab",
        "version": __version__,
        "inputs": {name: {"path": str(p), "sha256": file_sha256(p)}
                   for name, p in input_paths.items()},
        "grid": {"omegas_rad_s": [float(w) for w in grid.omegas]},
        "seed": int(seed),
    }
    if extra:
        out.update(extra)
    return out


def _rh_dict(rh) -> dict:
    return {name: {"stable": r.stable, "reason": r.reason} for name, r in rh.items()}


def report_to_dict(report: CertificationReport, prov: dict | None = None) -> dict:
    doc = {
        "converter_label": report.converter_label,
        "grid_label": report.grid_label,
        "verdict": report.verdict,
        "f_hz": [float(f) for f in report.frequencies.hz],
        "margin": [float(m) for m in report.margin],
        "worst": {"omega_rad_s": report.worst_omega,
                  "f_hz": report.worst_omega / (2 * np.pi),
                  "rho": report.worst_margin},
        "rh_infinity": _rh_dict(report.rh_inf),
        "diagnostics": {k: (float(v) if isinstance(v, (int, float, np.floating)) else v)
                        for k, v in report.diagnostics.items()},
    }
    if prov is not None:
        doc["provenance"] = prov
    return doc


def cscr_to_dict(result: CscrResult, prov: dict | None = None) -> dict:
    doc = {
        "cscr": None if result.no_constraint else result.cscr,
        "no_constraint": result.no_constraint,
        "critical_frequency_hz": None if result.no_constraint
        else result.critical_frequency_hz,
        "f_hz": [float(f) for f in result.frequencies.hz],
        "positive_axis_reach": [float(r) for r in result.reach],
    }
    if prov is not None:
        doc["provenance"] = prov
    return doc


def write_json(path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_boundary_csv(path, entries) -> None:
    """Boundary export: rows (freq_hz, re, im, region_id, filled), one row per
    boundary vertex.  `entries` is an iterable of (f_hz, region_id, SrgRegion)."""
    lines = ["freq_hz,re,im,region_id,filled"]
    for f_hz, region_id, region in entries:
        filled = 1 if region.filled else 0
        for z in region.boundary_upper:
            lines.append(f"{float(f_hz)!r},{float(z.real)!r},{float(z.imag)!r},"
                         f"{region_id},{filled}")
    Path(path).write_text("\n".join(lines) + "\n")
