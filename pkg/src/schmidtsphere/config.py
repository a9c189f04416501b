"""JSON configuration: parsing with collected error paths, and serialization.

Complex matrices are accepted as ``{"re": [[...]], "im": [[...]]}``, as nested
lists of real numbers, or as nested lists of ``[re, im]`` pairs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError, SchmidtError
from .fields import CouplingHamiltonian
from .reduced import ControlSchedule, LocalControl
from .states import BipartiteState, Kind, state_of_matrix

KINDS = [k.value for k in Kind]


class _Errors(list):
    def add(self, path: str, msg: str):
        self.append(f"{path}: {msg}" if path else msg)

    def raise_if_any(self):
        if self:
            raise ConfigError(self)


def parse_matrix(obj, path: str, errors: _Errors):
    """Decode a complex matrix; returns ``None`` (and records why) on failure."""
    try:
        if isinstance(obj, dict):
            if "re" not in obj:
                errors.add(path, "missing field 're'")
                return None
            re = np.asarray(obj["re"], dtype=float)
            im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
            if re.shape != im.shape:
                errors.add(path, f"'re' shape {re.shape} differs from 'im' shape {im.shape}")
                return None
            m = re + 1j * im
        else:
            arr = np.asarray(obj, dtype=float)
            if arr.ndim == 3 and arr.shape[-1] == 2:
                m = arr[..., 0] + 1j * arr[..., 1]
            else:
                m = arr.astype(complex)
    except (TypeError, ValueError):
        errors.add(path, "not a numeric matrix")
        return None
    if m.ndim != 2:
        errors.add(path, f"expected a 2-D matrix, got {m.ndim} dimension(s)")
        return None
    if not np.all(np.isfinite(m)):
        errors.add(path, "non-finite entries")
        return None
    return m


def encode_matrix(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def _kind(data: dict, errors: _Errors, path: str = ""):
    if not isinstance(data, dict):
        errors.add(path, "expected a JSON object")
        return None
    if "kind" not in data:
        errors.add(path, "missing field 'kind'")
        return None
    if data["kind"] not in KINDS:
        errors.add(f"{path}kind" if path else "kind", f"unknown kind {data['kind']!r}; expected one of {KINDS}")
        return None
    return Kind(data["kind"])


def _hermitian(m, path, errors):
    if m.shape[0] != m.shape[1]:
        errors.add(path, f"not square: shape {m.shape}")
        return False
    defect = float(np.max(np.abs(m - m.conj().T)))
    if defect > 1e-12 * max(1.0, float(np.max(np.abs(m)))):
        errors.append(f"{path} not Hermitian: defect {defect:.0e}")
        return False
    return True


def parse_h0(data) -> CouplingHamiltonian:
    errors = _Errors()
    kind = _kind(data, errors)
    factors = data.get("factors") if isinstance(data, dict) else None
    pairs = []
    if isinstance(data, dict) and not isinstance(factors, list):
        errors.add("factors", "missing or not a list")
    elif isinstance(factors, list):
        if not factors:
            errors.add("factors", "empty list")
        for k, fac in enumerate(factors):
            ok = True
            mats = []
            for name in ("E", "F"):
                path = f"factors[{k}].{name}"
                if not isinstance(fac, dict) or name not in fac:
                    errors.add(f"factors[{k}]", f"missing field '{name}'")
                    ok = False
                    continue
                m = parse_matrix(fac[name], path, errors)
                ok = ok and m is not None and _hermitian(m, path, errors)
                mats.append(m)
            if ok:
                pairs.append(tuple(mats))
    errors.raise_if_any()
    try:
        return CouplingHamiltonian(kind, pairs)
    except SchmidtError as exc:
        raise ConfigError([str(exc)]) from exc


def parse_state(data, renormalize: bool = False) -> BipartiteState:
    errors = _Errors()
    kind = _kind(data, errors)
    if isinstance(data, dict) and "re" not in data:
        errors.add("", "missing field 're'")
    errors.raise_if_any()
    m = parse_matrix(data, "", errors)
    errors.raise_if_any()
    for key, size in (("d1", m.shape[0]), ("d2", m.shape[1])):
        if key in data and data[key] != size:
            errors.add(key, f"declared {data[key]} but matrix has {size}")
    errors.raise_if_any()
    try:
        return state_of_matrix(kind, m, renormalize=renormalize)
    except SchmidtError as exc:
        raise ConfigError([str(exc)]) from exc


def parse_schedule(data, d1: int, d2: int, T: float | None = None) -> ControlSchedule:
    """Segments are ``{"V", "W"}`` unitaries, ``{"E", "F"}`` generators
    (``V = exp(-iE)``) or ``{"identity": true}``.  Without breakpoints the
    single segment spans ``[0, T]``; ``T`` also extends or truncates a schedule.
    """
    errors = _Errors()
    if not isinstance(data, dict):
        raise ConfigError(["schedule: expected a JSON object"])
    segs_raw = data.get("segments")
    if not isinstance(segs_raw, list) or not segs_raw:
        errors.add("segments", "missing or empty list")
        errors.raise_if_any()
    bps = data.get("breakpoints")
    if bps is None:
        if T is None:
            errors.add("breakpoints", "missing (and no horizon T given)")
        elif len(segs_raw) != 1:
            errors.add("breakpoints", "required when there is more than one segment")
        else:
            bps = [0.0, T]
    segments = []
    for k, seg in enumerate(segs_raw):
        path = f"segments[{k}]"
        if not isinstance(seg, dict):
            errors.add(path, "expected a JSON object")
            continue
        try:
            if seg.get("identity"):
                segments.append(LocalControl.identity(d1, d2))
            elif "V" in seg:
                V = parse_matrix(seg["V"], f"{path}.V", errors)
                W = parse_matrix(seg["W"], f"{path}.W", errors) if "W" in seg else None
                if V is not None:
                    segments.append(LocalControl(V, W))
            elif "E" in seg:
                E = parse_matrix(seg["E"], f"{path}.E", errors)
                F = parse_matrix(seg["F"], f"{path}.F", errors) if "F" in seg else None
                ok = E is not None and _hermitian(E, f"{path}.E", errors)
                ok = ok and (F is None or _hermitian(F, f"{path}.F", errors))
                if ok:
                    segments.append(LocalControl.from_generator(E, F))
            else:
                errors.add(path, "needs 'V' (unitary), 'E' (generator) or 'identity'")
        except SchmidtError as exc:
            errors.add(path, str(exc))
    for k, seg in enumerate(segments):
        if seg.V.shape[0] != d1 or seg.W.shape[0] != d2:
            errors.add(f"segments[{k}]", f"acts on {seg.V.shape[0]}x{seg.W.shape[0]}, expected {d1}x{d2}")
    errors.raise_if_any()
    try:
        sched = ControlSchedule(bps, segments)
        if T is not None and T != sched.T:
            sched = sched.with_horizon(T)
    except SchmidtError as exc:
        raise ConfigError([str(exc)]) from exc
    except ValueError as exc:
        raise ConfigError([f"breakpoints: {exc}"]) from exc
    return sched


def schedule_to_dict(schedule: ControlSchedule) -> dict:
    segs = []
    for seg in schedule.segments:
        if seg.generator is not None:
            segs.append({"E": encode_matrix(seg.generator[0]), "F": encode_matrix(seg.generator[1])})
        else:
            segs.append({"V": encode_matrix(seg.V), "W": encode_matrix(seg.W)})
    return {"breakpoints": schedule.breakpoints.tolist(), "segments": segs}


def parse_point(text, n: int | None = None) -> np.ndarray:
    """``"0.8,0.6"`` or a list of numbers; must have unit norm."""
    try:
        if isinstance(text, str):
            vals = [float(v) for v in text.replace(" ", "").split(",") if v]
        else:
            vals = [float(v) for v in text]
    except (TypeError, ValueError) as exc:
        raise ConfigError([f"sigma0: cannot parse {text!r}"]) from exc
    x = np.array(vals)
    errors = _Errors()
    if n is not None and x.size != n:
        errors.add("sigma0", f"has {x.size} values, expected {n}")
    elif not np.all(np.isfinite(x)) or abs(np.linalg.norm(x) - 1) > 1e-8:
        errors.add("sigma0", f"must be a finite unit vector (norm {np.linalg.norm(x):.6g})")
    errors.raise_if_any()
    return x


def read_json(path) -> object:
    p = Path(path)
    if not p.exists():
        raise ConfigError([f"{path}: file not found"])
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})"]) from exc


def load_config(path) -> dict:
    """Experiment file with optional ``h0``, ``state``, ``schedule``, ``sigma0``, ``T``, ``dt``, ``seed``.

    Every section is validated; all failures are reported together.
    """
    data = read_json(path)
    if not isinstance(data, dict):
        raise ConfigError([f"{path}: expected a JSON object"])
    errors: list[str] = []
    out: dict = {}
    for key in ("T", "dt"):
        if key in data:
            if not isinstance(data[key], (int, float)) or data[key] <= 0:
                errors.append(f"{key}: must be a positive number")
            else:
                out[key] = float(data[key])
    if "seed" in data:
        out["seed"] = int(data["seed"])

    def section(name, fn):
        try:
            out[name] = fn(data[name])
        except ConfigError as exc:
            errors.extend(f"{name}.{e}" if not e.startswith(name) else e for e in exc.errors)

    if "h0" in data:
        section("h0", parse_h0)
    if "state" in data:
        section("state", parse_state)
    h0 = out.get("h0")
    if "sigma0" in data:
        section("sigma0", lambda v: parse_point(v, h0.n if h0 is not None else None))
    if "schedule" in data:
        if h0 is None:
            errors.append("schedule: needs 'h0' to fix the dimensions")
        else:
            section("schedule", lambda v: parse_schedule(v, h0.d1, h0.d2, out.get("T")))
    if errors:
        raise ConfigError(errors)
    return out


def save_config(path, h0=None, state=None, schedule=None, sigma0=None, **scalars) -> None:
    data: dict = {}
    if h0 is not None:
        data["h0"] = h0.to_dict()
    if state is not None:
        data["state"] = state.to_dict()
    if schedule is not None:
        data["schedule"] = schedule_to_dict(schedule)
    if sigma0 is not None:
        data["sigma0"] = [float(v) for v in sigma0]
    data.update(scalars)
    Path(path).write_text(json.dumps(data, indent=2))


__all__ = [
    "encode_matrix",
    "load_config",
    "parse_h0",
    "parse_matrix",
    "parse_point",
    "parse_schedule",
    "parse_state",
    "read_json",
    "save_config",
    "schedule_to_dict",
]
