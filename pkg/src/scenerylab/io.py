"""File formats: walk TOML, scenery JSON, and the on-disk Fourier table cache."""
from __future__ import annotations

import hashlib
import json
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

import mpmath

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .analysis import FourierTable, fourier_transform
from .cyclotomic import CyclotomicNumber
from .errors import DomainError, InvalidInputError
from .groups import GroupSpec
from .scenery import Scenery
from .walks import DEFAULT_PRECISION_BITS, EXACT, FLOAT, StepDistribution, delta_walk_z7

PRESETS = {"delta-z7": delta_walk_z7}
CACHE_ENV = "SCENERYLAB_CACHE"


class WalkFileError(InvalidInputError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        where = ""
        if path:
            where = f"{path}:{line}: " if line else f"{path}: "
        super().__init__(where + message)
        self.line = line


def _line_of(text: str, key: str) -> int | None:
    pat = re.compile(r'^\s*"?' + re.escape(key) + r'"?\s*=', re.M)
    m = pat.search(text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _parse_rational(value, mode: str):
    if isinstance(value, bool):
        raise ValueError("booleans are not probabilities")
    if mode == EXACT:
        if isinstance(value, float):
            raise ValueError("exact walks need rationals such as \"1/3\", not floats")
        return Fraction(value)
    if isinstance(value, str) and "/" in value:
        num, den = value.split("/")
        return mpmath.mpf(num) / mpmath.mpf(den)
    return mpmath.mpf(value) if not isinstance(value, float) else mpmath.mpf(repr(value))


def split_elements(text: str) -> list[str]:
    """Split ``"1,2,(3,4)"`` at top-level commas or semicolons."""
    text = text.strip()
    if text.startswith("{") and text.endswith("}") or text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch in ",;" and depth == 0:
            if cur.strip():
                out.append(cur.strip())
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


def _element(group: GroupSpec, raw):
    if isinstance(raw, str):
        return group.parse_element(raw)
    return group.element(raw)


def walk_from_mapping(data: dict, *, path: str | None = None, text: str = "", group: GroupSpec | None = None) -> StepDistribution:
    """Build a walk from parsed TOML (``group`` plus ``multiset``, ``[probs]`` or ``preset``)."""
    bits = int(data.get("precision_bits", DEFAULT_PRECISION_BITS))
    if "preset" in data:
        name = data["preset"]
        if name not in PRESETS:
            raise WalkFileError(f"unknown preset {name!r}; known: {sorted(PRESETS)}", path, _line_of(text, "preset"))
        return PRESETS[name](bits)
    if "group" in data:
        try:
            group = GroupSpec.parse(str(data["group"]))
        except DomainError as exc:
            raise WalkFileError(str(exc), path, _line_of(text, "group")) from exc
    if group is None:
        raise WalkFileError("missing 'group'", path)
    mode = data.get("mode", EXACT)
    if mode not in (EXACT, FLOAT):
        raise WalkFileError(f"mode must be 'exact' or 'float', got {mode!r}", path, _line_of(text, "mode"))
    has_ms, has_probs = "multiset" in data, "probs" in data
    if has_ms == has_probs:
        raise WalkFileError("give exactly one of 'multiset' or '[probs]'", path)
    try:
        if has_ms:
            elems = [_element(group, e) for e in data["multiset"]]
            walk = StepDistribution.uniform(group, elems)
            return walk if mode == EXACT else walk.to_float(bits)
        probs = {}
        for key, value in data["probs"].items():
            try:
                probs[group.parse_element(key)] = _parse_rational(value, mode)
            except (ValueError, ZeroDivisionError, DomainError) as exc:
                raise WalkFileError(f"bad entry {key!r}: {exc}", path, _line_of(text, key)) from exc
        kw = {"precision_bits": bits}
        if mode == FLOAT and "tolerance" in data:
            kw["tolerance"] = mpmath.mpf(str(data["tolerance"]))
        return StepDistribution(group, probs, mode, **kw)
    except WalkFileError:
        raise
    except (DomainError, ValueError) as exc:
        key = "multiset" if has_ms else "probs"
        raise WalkFileError(str(exc), path, _line_of(text, key)) from exc


def load_walk(path: str | Path) -> StepDistribution:
    text = Path(path).read_text()
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise WalkFileError(f"TOML syntax error: {exc}", str(path)) from exc
    return walk_from_mapping(data, path=str(path), text=text)


def parse_walk_arg(arg: str, group: GroupSpec | None = None, precision_bits: int | None = None) -> StepDistribution:
    """A walk given on the command line: a TOML path, ``preset:NAME`` or an inline multiset."""
    if arg.startswith("preset:"):
        data = {"preset": arg.split(":", 1)[1]}
        if precision_bits:
            data["precision_bits"] = precision_bits
        return walk_from_mapping(data)
    if os.path.exists(arg):
        walk = load_walk(arg)
        if group is not None and walk.group != group:
            raise DomainError(f"--group {group} disagrees with the walk file's group {walk.group}")
        return walk
    if group is None:
        raise InvalidInputError(f"{arg!r} is not a file; an inline multiset needs --group")
    return walk_from_mapping({"multiset": split_elements(arg)}, group=group)


def load_scenery(path: str | Path, group: GroupSpec | None = None) -> Scenery:
    data = json.loads(Path(path).read_text())
    return scenery_from_json(data, group)


def scenery_from_json(data: dict, group: GroupSpec | None = None) -> Scenery:
    if "group" in data:
        g = GroupSpec.parse(data["group"])
        if group is not None and g != group:
            raise DomainError(f"scenery group {g} differs from walk group {group}")
        group = g
    if group is None:
        raise InvalidInputError("scenery needs a group")
    if "bits" in data:
        return Scenery(group, tuple(data["bits"]))
    if "ones" in data:
        return Scenery.indicator(group, [_element(group, e) for e in data["ones"]])
    raise InvalidInputError("scenery JSON needs 'bits' or 'ones'")


def parse_scenery_arg(arg: str, group: GroupSpec) -> Scenery:
    """Scenery JSON path, a bit string like ``0110000``, or ``ones:0,1``."""
    if os.path.exists(arg):
        return load_scenery(arg, group)
    if arg.startswith("ones:"):
        return Scenery.indicator(group, [group.parse_element(e) for e in split_elements(arg[5:])])
    if set(arg) <= {"0", "1"}:
        return Scenery(group, tuple(int(c) for c in arg))
    raise InvalidInputError(f"cannot read scenery {arg!r}")


# -- Fourier table cache ------------------------------------------------------


def _cache_dir() -> Path | None:
    d = os.environ.get(CACHE_ENV)
    return Path(d) if d else None


def _cache_key(walk: StepDistribution, bits: int | None) -> str:
    raw = f"{walk.key()}|{bits or walk.precision_bits}"
    return hashlib.sha256(raw.encode()).hexdigest()[:32]


def _table_to_json(table: FourierTable) -> dict:
    values = {}
    for x, v in table.values.items():
        values[str(x.index)] = v.to_json() if table.mode == EXACT else [mpmath.nstr(v.real, 90), mpmath.nstr(v.imag, 90)]
    return {"mode": table.mode, "precision_bits": table.precision_bits, "tolerance": str(table.tolerance), "values": values}


def _table_from_json(walk: StepDistribution, data: dict) -> FourierTable:
    g = walk.group
    if data["mode"] == EXACT:
        ctx = tuple(n for n, _ in g.factors)
        values = {g.from_index(int(i)): CyclotomicNumber.from_json(ctx, v) for i, v in data["values"].items()}
        return FourierTable(g, EXACT, values)
    bits = data["precision_bits"]
    with mpmath.workprec(bits):
        values = {g.from_index(int(i)): mpmath.mpc(re, im) for i, (re, im) in data["values"].items()}
        tol = mpmath.mpf(data["tolerance"])
    return FourierTable(g, FLOAT, values, bits, tol)


def cached_fourier_transform(walk: StepDistribution, precision_bits: int | None = None, cap: int | None = None) -> FourierTable:
    """:func:`fourier_transform`, memoized under ``$SCENERYLAB_CACHE`` when that is set."""
    kw = {"precision_bits": precision_bits}
    if cap is not None:
        kw["cap"] = cap
    d = _cache_dir()
    if d is None:
        return fourier_transform(walk, **kw)
    path = d / f"fourier-{_cache_key(walk, precision_bits)}.json"
    if path.exists():
        return _table_from_json(walk, json.loads(path.read_text()))
    table = fourier_transform(walk, **kw)
    d.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(_table_to_json(table)))
    tmp.replace(path)
    return table
