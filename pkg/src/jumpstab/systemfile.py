"""Read and write system descriptions as UTF-8 JSON files.

A system file bundles everything one analysis needs: the mode matrices,
the switching law, and the initial Gaussian mixture.  All matrices are
row-major nested arrays.  The schema:

    {
      "n": 2,
      "modes": {"slow": [[0.5, 0.0], [0.0, 0.5]], "fast": [[...], [...]]},
      "switching": {"type": "iid", "pi": [0.5, 0.5]},
      "initial": [{"weight": 1.0, "mean": [1.0, 0.0],
                   "cov": [[0.1, 0.0], [0.0, 0.1]]}]
    }

The ``switching`` object is a tagged union over the four law kinds:

    {"type": "iid",      "pi": [...]}
    {"type": "markov",   "P": [[...], ...], "pi0": [...]}
    {"type": "schedule", "vectors": [[...], ...]}
    {"type": "sequence", "indices": [1, 2, ...]}

Mode order follows key order in the ``modes`` object; sequence indices
are 1-based references into that order.

Parsing is structural: shapes, types, and field names are enforced here
with errors naming the offending field, while value-level requirements
(probability sums, PSD covariances, index ranges) are left to
``validate_system`` so a validation pass can report every violation at
once instead of stopping at the first.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .sysmodel import (
    GaussianMixture,
    IIDSwitching,
    JumpLinearSystem,
    MarkovSwitching,
    ScheduleSwitching,
    SequenceSwitching,
    SwitchingLaw,
)

__all__ = [
    "SystemFile",
    "SystemFileError",
    "load_system_file",
    "save_system_file",
]


class SystemFileError(ValueError):
    """A system description file does not match the schema."""


def _as_float(value, where):
    # bool is an int subclass; JSON true/false must not pass as numbers
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SystemFileError(f"{where} must be a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise SystemFileError(f"{where} must be finite, got {value!r}")
    return out


def _as_vector(value, where, length=None):
    if not isinstance(value, list) or not value:
        raise SystemFileError(f"{where} must be a nonempty array")
    if length is not None and len(value) != length:
        raise SystemFileError(
            f"{where} has length {len(value)}, expected {length}"
        )
    return [_as_float(x, f"{where}[{i}]") for i, x in enumerate(value)]


def _as_matrix(value, where, rows=None, cols=None):
    if not isinstance(value, list) or not value:
        raise SystemFileError(f"{where} must be a nonempty array of rows")
    if rows is not None and len(value) != rows:
        raise SystemFileError(
            f"{where} has {len(value)} rows, expected {rows}"
        )
    width = cols if cols is not None else None
    out = []
    for i, row in enumerate(value):
        if not isinstance(row, list):
            raise SystemFileError(f"{where} row {i + 1} must be an array")
        if width is None:
            width = len(row)
        if len(row) != width:
            raise SystemFileError(
                f"{where} row {i + 1} has length {len(row)}, "
                f"expected {width}"
            )
        out.append(
            [_as_float(x, f"{where} row {i + 1}") for x in row]
        )
    return out


def _require_keys(obj, where, required, optional=()):
    if not isinstance(obj, dict):
        raise SystemFileError(f"{where} must be an object")
    for key in required:
        if key not in obj:
            raise SystemFileError(f"{where} is missing field '{key}'")
    allowed = set(required) | set(optional)
    for key in obj:
        if key not in allowed:
            raise SystemFileError(f"{where} has unknown field '{key}'")


def _build(where, ctor, **kwargs):
    try:
        return ctor(**kwargs)
    except ValueError as exc:
        raise SystemFileError(f"{where}: {exc}") from exc


def _parse_switching(obj) -> SwitchingLaw:
    if not isinstance(obj, dict) or "type" not in obj:
        raise SystemFileError(
            "switching must be an object with a 'type' field"
        )
    kind = obj["type"]
    if kind == "iid":
        _require_keys(obj, "switching", ("type", "pi"))
        return _build(
            "switching.pi", IIDSwitching,
            pi=_as_vector(obj["pi"], "switching.pi"),
        )
    if kind == "markov":
        _require_keys(obj, "switching", ("type", "P", "pi0"))
        p = _as_matrix(obj["P"], "switching.P")
        if len(p) != len(p[0]):
            raise SystemFileError(
                f"switching.P must be square, got "
                f"{len(p)}x{len(p[0])}"
            )
        return _build(
            "switching", MarkovSwitching,
            P=p, pi0=_as_vector(obj["pi0"], "switching.pi0", len(p)),
        )
    if kind == "schedule":
        _require_keys(obj, "switching", ("type", "vectors"))
        return _build(
            "switching.vectors", ScheduleSwitching,
            vectors=_as_matrix(obj["vectors"], "switching.vectors"),
        )
    if kind == "sequence":
        _require_keys(obj, "switching", ("type", "indices"))
        raw = obj["indices"]
        if not isinstance(raw, list) or not raw:
            raise SystemFileError(
                "switching.indices must be a nonempty array"
            )
        for i, x in enumerate(raw):
            if isinstance(x, bool) or not isinstance(x, int):
                raise SystemFileError(
                    f"switching.indices[{i}] must be an integer, "
                    f"got {x!r}"
                )
        return _build(
            "switching.indices", SequenceSwitching, indices=raw
        )
    raise SystemFileError(
        f"switching.type must be one of 'iid', 'markov', 'schedule', "
        f"'sequence', got {kind!r}"
    )


@dataclass(frozen=True)
class SystemFile:
    """Parsed system description: dynamics, switching law, initial mixture.

    Attributes
    ----------
    system : JumpLinearSystem
    switching : SwitchingLaw
    initial : GaussianMixture
    """

    system: JumpLinearSystem
    switching: SwitchingLaw
    initial: GaussianMixture

    @classmethod
    def from_dict(cls, data) -> "SystemFile":
        """Build from a decoded JSON object, checking the schema.

        Raises
        ------
        SystemFileError
            If any field is missing, unknown, or has the wrong shape.
            The message names the offending field.
        """
        _require_keys(
            data, "system file", ("n", "modes", "switching", "initial")
        )
        n = data["n"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise SystemFileError(
                f"n must be a positive integer, got {n!r}"
            )
        modes_obj = data["modes"]
        if not isinstance(modes_obj, dict) or not modes_obj:
            raise SystemFileError(
                "modes must be a nonempty object of named matrices"
            )
        names = []
        mats = []
        for name, mat in modes_obj.items():
            names.append(str(name))
            mats.append(
                _as_matrix(mat, f"mode '{name}'", rows=n, cols=n)
            )
        system = _build(
            "modes", JumpLinearSystem, modes=mats, names=tuple(names)
        )

        switching = _parse_switching(data["switching"])

        init_obj = data["initial"]
        if not isinstance(init_obj, list) or not init_obj:
            raise SystemFileError(
                "initial must be a nonempty array of components"
            )
        components = []
        for i, comp in enumerate(init_obj):
            where = f"initial[{i}]"
            _require_keys(comp, where, ("weight", "mean", "cov"))
            components.append(
                (
                    _as_float(comp["weight"], f"{where}.weight"),
                    _as_vector(comp["mean"], f"{where}.mean", n),
                    _as_matrix(comp["cov"], f"{where}.cov", n, n),
                )
            )
        initial = _build(
            "initial", GaussianMixture.from_components,
            components=components,
        )
        return cls(system=system, switching=switching, initial=initial)

    def to_dict(self) -> dict:
        """Return a JSON-serializable dict in the file schema."""
        sys_ = self.system
        modes = {
            sys_.mode_name(j): sys_.modes[j].tolist()
            for j in range(sys_.m)
        }
        law = self.switching
        if isinstance(law, IIDSwitching):
            switching = {"type": "iid", "pi": law.pi.tolist()}
        elif isinstance(law, MarkovSwitching):
            switching = {
                "type": "markov",
                "P": law.P.tolist(),
                "pi0": law.pi0.tolist(),
            }
        elif isinstance(law, ScheduleSwitching):
            switching = {
                "type": "schedule",
                "vectors": law.vectors.tolist(),
            }
        elif isinstance(law, SequenceSwitching):
            switching = {
                "type": "sequence",
                "indices": list(law.indices),
            }
        else:
            raise TypeError(
                f"unsupported switching law {type(law).__name__}"
            )
        initial = [
            {
                "weight": float(c.weight),
                "mean": c.mean.tolist(),
                "cov": c.cov.tolist(),
            }
            for c in self.initial.components
        ]
        return {
            "n": int(sys_.n),
            "modes": modes,
            "switching": switching,
            "initial": initial,
        }


def load_system_file(path) -> SystemFile:
    """Parse a JSON system file.

    Raises
    ------
    SystemFileError
        On malformed JSON (with line and column) or schema violations.
    OSError
        If the file cannot be read.
    """
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFileError(
            f"invalid JSON at line {exc.lineno} column {exc.colno}: "
            f"{exc.msg}"
        ) from exc
    return SystemFile.from_dict(data)


def save_system_file(sf: SystemFile, path) -> None:
    """Write a system file as indented UTF-8 JSON."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(sf.to_dict(), handle, indent=2)
        handle.write("\n")
