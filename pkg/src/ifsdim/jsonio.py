"""JSON descriptions of contraction families.

Five document kinds are supported:

* ``similarity_list`` -- explicit affine branches,
* ``polynomial_tail`` -- the constructive family on the sequence i^(-p)
  with ratios p * i^(-t) past a cutoff, solved for a target dimension h,
* ``gauss_digits`` -- continued-fraction branches for an explicit digit
  list or a parametric digit set (spaced / clustered / full),
* ``complex_gauss`` -- complex continued fractions on the standard disc,
* ``renyi_parabolic`` -- backwards continued fractions; digit 2 is
  parabolic and triggers the induced system.

The schema ships in docs/cifs_spec.schema.json.
"""

from __future__ import annotations

import json
from pathlib import Path

from .cifs import CifsSpec, renyi_parabolic_spec
from .errors import ConfigurationError
from .maps import Composite, ComplexGaussBranch, GaussBranch, Similarity
from .mobius import Disc
from .tails import (
    ClusteredDigits,
    ComplexGaussTail,
    FullDigits,
    GaussDigitTail,
    SpacedDigits,
)

KINDS = ("similarity_list", "polynomial_tail", "gauss_digits", "complex_gauss", "renyi_parabolic")


def _require(doc: dict, key: str):
    if key not in doc:
        raise ConfigurationError(f"spec document is missing the required key {key!r}")
    return doc[key]


def _similarity_list(doc: dict) -> CifsSpec:
    maps = _require(doc, "maps")
    if not maps:
        raise ConfigurationError("similarity_list needs at least one map")
    explicit = []
    for k, m in enumerate(maps, start=1):
        explicit.append((k, Similarity(float(m["ratio"]), float(m["offset"]))))
    lo, hi = doc.get("domain", (0.0, 1.0))
    anchor = doc.get("anchor")
    return CifsSpec(1, (float(lo), float(hi)), tuple(explicit), anchor=anchor,
                    meta={"family": "similarity_list"})


def _polynomial_tail(doc: dict) -> CifsSpec:
    from .pressure import build_sharp_family

    p = float(_require(doc, "p"))
    t = float(_require(doc, "t"))
    h = float(_require(doc, "h"))
    return build_sharp_family(p, t, h)


def _gauss_digits(doc: dict) -> CifsSpec:
    digits = _require(doc, "digits")
    if isinstance(digits, dict):
        kind = _require(digits, "set")
        if kind == "spaced":
            tail = GaussDigitTail(SpacedDigits(float(_require(digits, "p"))))
        elif kind == "clustered":
            tail = GaussDigitTail(ClusteredDigits(float(_require(digits, "alpha"))))
        elif kind == "full":
            tail = GaussDigitTail(FullDigits(int(digits.get("start", 2))))
        else:
            raise ConfigurationError(f"unknown digit set kind {kind!r}")
        return CifsSpec(1, (0.0, 1.0), (), tail, meta={"family": "gauss", "digits": dict(digits)})
    digits = sorted(set(int(b) for b in digits))
    if any(b < 1 for b in digits):
        raise ConfigurationError("continued-fraction digits are positive integers")
    explicit = []
    if 1 in digits:
        # recode: the raw digit-1 branch is not uniformly contracting, so
        # digit strings are parsed into blocks (b) for b != 1 and (1, b),
        # giving the uniformly contracting maps S_1 o S_b
        for b in digits:
            if b != 1:
                explicit.append((b, GaussBranch(b)))
            explicit.append(((1, b), Composite((GaussBranch(1), GaussBranch(b)))))
    else:
        explicit = [(b, GaussBranch(b)) for b in digits]
    return CifsSpec(1, (0.0, 1.0), tuple(explicit), meta={"family": "gauss", "digits": digits})


def _complex_gauss(doc: dict) -> CifsSpec:
    domain = Disc(0.5 + 0j, 0.5)
    digits = _require(doc, "digits")
    if digits == "full":
        return CifsSpec(2, domain, (), ComplexGaussTail(), meta={"family": "complex_gauss"})
    explicit = []
    for m, n in digits:
        if (m, n) == (1, 0):
            raise ConfigurationError("complex digit 1 needs the recoded full system")
        explicit.append(((int(m), int(n)), ComplexGaussBranch(complex(int(m), int(n)))))
    return CifsSpec(2, domain, tuple(explicit), meta={"family": "complex_gauss", "digits": list(digits)})


def _renyi_parabolic(doc: dict) -> CifsSpec:
    return renyi_parabolic_spec([int(b) for b in _require(doc, "digits")])


_LOADERS = {
    "similarity_list": _similarity_list,
    "polynomial_tail": _polynomial_tail,
    "gauss_digits": _gauss_digits,
    "complex_gauss": _complex_gauss,
    "renyi_parabolic": _renyi_parabolic,
}


def spec_from_dict(doc: dict) -> CifsSpec:
    kind = _require(doc, "kind")
    loader = _LOADERS.get(kind)
    if loader is None:
        raise ConfigurationError(f"unknown spec kind {kind!r}; expected one of {KINDS}")
    return loader(doc)


def load_spec(path) -> CifsSpec:
    raw = Path(path).read_text()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"spec file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigurationError(f"spec file {path} must hold a JSON object")
    return spec_from_dict(doc)
