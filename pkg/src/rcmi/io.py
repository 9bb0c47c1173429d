"""File formats: JSON state files, JSON sweep configs and CSV reports.

A state file is UTF-8 JSON::

    {"layout": {"systems": [{"label": "A", "dim": 2}, ...]},
     "matrix": [[re, im], ...]}

``matrix`` lists the entries in row-major order, either flat (``d*d`` pairs)
or nested as ``d`` rows of ``d`` pairs. Real entries may be given as plain
numbers.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Sequence, TextIO

import numpy as np

from .conjecture import SweepConfig, TrialRecord, summarize, sweep_preset
from .errors import ConfigError, InputError, ParseError
from .linalg import SystemLayout
from .states import DensityOperator

__all__ = [
    "state_to_json",
    "state_from_json",
    "read_state",
    "write_state",
    "SWEEP_COLUMNS",
    "format_float",
    "write_sweep_csv",
    "sweep_csv",
    "sweep_config_from_mapping",
    "read_sweep_config",
]

SWEEP_COLUMNS = ("family", "ordering", "gamma", "trial", "seed", "numerator", "trace", "tagged", "violation")


def format_float(x: float) -> str:
    """Round-trip text form with 17 significant digits."""
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------
def state_to_json(rho: DensityOperator) -> str:
    """Serialize a state with flat row-major ``[re, im]`` pairs."""
    m = np.asarray(rho.entries).reshape(-1)
    doc = {
        "layout": {"systems": [{"label": lab, "dim": d} for lab, d in zip(rho.layout.labels, rho.layout.dims)]},
        "matrix": [[float(z.real), float(z.imag)] for z in m],
    }
    return json.dumps(doc, indent=1)


def _entry(x: Any, where: str) -> complex:
    if isinstance(x, bool):
        raise ParseError(f"{where}: expected a number or [re, im] pair, got {x!r}")
    if isinstance(x, (int, float)):
        return complex(float(x), 0.0)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in x):
        return complex(float(x[0]), float(x[1]))
    raise ParseError(f"{where}: expected a number or [re, im] pair, got {x!r}")


def _layout(doc: Any) -> SystemLayout:
    if not isinstance(doc, dict) or not isinstance(doc.get("layout"), dict):
        raise ParseError("field 'layout': missing or not an object")
    systems = doc["layout"].get("systems")
    if not isinstance(systems, list) or not systems:
        raise ParseError("field 'layout.systems': expected a non-empty list")
    pairs = []
    for i, s in enumerate(systems):
        where = f"layout.systems[{i}]"
        if not isinstance(s, dict) or set(s) != {"label", "dim"}:
            raise ParseError(f"field '{where}': expected an object with keys 'label' and 'dim'")
        if not isinstance(s["label"], str) or not s["label"]:
            raise ParseError(f"field '{where}.label': expected a non-empty string")
        if not isinstance(s["dim"], int) or isinstance(s["dim"], bool) or s["dim"] < 1:
            raise ParseError(f"field '{where}.dim': expected a positive integer, got {s['dim']!r}")
        pairs.append((s["label"], s["dim"]))
    try:
        return SystemLayout(pairs)
    except InputError as exc:
        raise ParseError(f"field 'layout.systems': {exc}") from exc


def state_from_json(text: str) -> DensityOperator:
    """Parse and validate a state document.

    Raises
    ------
    ParseError
        Malformed JSON or fields, with the offending location.
    InputError
        Well-formed matrix that is not a density operator (not Hermitian,
        not PSD, trace not one).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    lay = _layout(doc)
    d = lay.total_dim
    mat = doc.get("matrix")
    if not isinstance(mat, list):
        raise ParseError("field 'matrix': missing or not a list")
    if len(mat) == d and all(isinstance(r, list) and len(r) == d for r in mat):
        flat = [(x, f"field 'matrix[{i}][{j}]'") for i, r in enumerate(mat) for j, x in enumerate(r)]
    elif len(mat) == d * d:
        flat = [(x, f"field 'matrix[{k}]'") for k, x in enumerate(mat)]
    else:
        raise ParseError(f"field 'matrix': expected {d * d} entries (or {d} rows of {d}) for layout dimension {d}")
    m = np.array([_entry(x, w) for x, w in flat], dtype=complex).reshape(d, d)
    if not np.all(np.isfinite(m)):
        raise ParseError("field 'matrix': entries must be finite")
    return DensityOperator(lay, m)


def read_state(path: str | Path) -> DensityOperator:
    """Read a state file (see module docstring)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read state file {path}: {exc}") from exc
    return state_from_json(text)


def write_state(rho: DensityOperator, path: str | Path) -> None:
    Path(path).write_text(state_to_json(rho) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Sweep CSV
# ---------------------------------------------------------------------------
def _bool(x: bool) -> str:
    return "true" if x else "false"


def write_sweep_csv(records: Sequence[TrialRecord], stream: TextIO) -> None:
    """Write trial rows followed by ``#``-prefixed per-gamma summary lines."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in records:
        w.writerow(
            [
                r.family,
                r.ordering,
                format_float(r.gamma),
                r.trial_index,
                r.seed,
                format_float(r.numerator),
                format_float(r.trace),
                _bool(r.tagged),
                _bool(r.violation),
            ]
        )
    summ = summarize(records)
    for s in summ:
        stream.write(
            f"# gamma={format_float(s.gamma)} trials={s.trials} violations={s.violations} "
            f"tagged={s.tagged} tagged_violations={s.tagged_violations} failed={s.failed}\n"
        )
    stream.write(
        f"# total trials={sum(s.trials for s in summ)} violations={sum(s.violations for s in summ)} "
        f"tagged={sum(s.tagged for s in summ)} tagged_violations={sum(s.tagged_violations for s in summ)} "
        f"failed={sum(s.failed for s in summ)}\n"
    )


def sweep_csv(records: Sequence[TrialRecord]) -> str:
    buf = io.StringIO()
    write_sweep_csv(records, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Sweep configs
# ---------------------------------------------------------------------------
_CONFIG_TYPES: dict[str, tuple[type, ...]] = {
    "family": (str,),
    "ordering": (str, list),
    "gamma_start": (int, float),
    "gamma_end": (int, float),
    "gamma_step": (int, float),
    "trials_per_gamma": (int,),
    "dims": (list,),
    "seed": (int,),
    "random_dims": (bool,),
    "xi": (int, float),
    "tol_violation": (int, float),
    "tag_rel": (int, float),
    "check_fd": (bool,),
    "classical": (bool,),
}


def sweep_config_from_mapping(doc: dict, base: SweepConfig | None = None, source: str = "config") -> SweepConfig:
    """Build a :class:`SweepConfig` from a mapping, naming any bad field.

    A ``"preset"`` key selects :func:`~rcmi.conjecture.sweep_preset` as the base.
    """
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: expected a JSON object")
    doc = dict(doc)
    if "preset" in doc:
        preset = doc.pop("preset")
        if not isinstance(preset, str):
            raise ConfigError(f"{source}: field 'preset' must be a string")
        base = sweep_preset(preset, doc.get("family", "nonsandwiched"))
    kwargs: dict[str, Any] = {} if base is None else dict(base.__dict__)
    for key, val in doc.items():
        if key not in _CONFIG_TYPES:
            raise ConfigError(f"{source}: unknown field {key!r}")
        types = _CONFIG_TYPES[key]
        bad_bool = isinstance(val, bool) and bool not in types
        if bad_bool or not isinstance(val, types):
            raise ConfigError(f"{source}: field {key!r} has invalid value {val!r}")
        if isinstance(val, float) and not math.isfinite(val):
            raise ConfigError(f"{source}: field {key!r} must be finite")
        kwargs[key] = val
    try:
        return SweepConfig(**kwargs)
    except (ConfigError, InputError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def read_sweep_config(path: str | Path) -> SweepConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return sweep_config_from_mapping(doc, source=str(path))

