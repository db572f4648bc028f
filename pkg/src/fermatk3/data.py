"""Bundled reference data: printed matrices, seeds, polarizations and maps.

The JSON files under data/ hold transcriptions of published values: the
22x22 intersection Gram matrix and its line ordering, the chamber seeds
(glue vectors, Weyl vector data, wall seeds), the two extra involutions,
polarization classes with their printed decompositions, the contracted-line
tables and the components of the projection/involution maps over GF(9).

The directory can be overridden with the FERMATK3_DATA environment
variable, so a run can be pointed at an alternative transcription.
GF(9) scalars are stored as [a, b] pairs meaning a + b*i with a, b mod 3.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction
from functools import lru_cache

_PKG_DIR = os.path.dirname(os.path.abspath(__file__))

ENV_VAR = "FERMATK3_DATA"


def data_dir() -> str:
    return os.environ.get(ENV_VAR) or os.path.join(_PKG_DIR, "data")


@lru_cache(maxsize=None)
def _load(name: str):
    path = os.path.join(data_dir(), name)
    with open(path, "r") as fh:
        return json.load(fh)


def gf9_code(pair) -> int:
    """[a, b] -> GF(9) code a + 3b."""
    a, b = pair
    return (a % 3) + 3 * (b % 3)


def poly_dict(terms) -> dict[tuple[int, int, int], int]:
    """JSON poly (list of [e1, e2, e3, [a, b]]) -> {exponents: code}."""
    out = {}
    for e1, e2, e3, c in terms:
        code = gf9_code(c)
        if code:
            out[(e1, e2, e3)] = code
    return out


def reference_frame():
    return _load("reference_frame.json")


def chamber_seeds():
    return _load("chamber_seeds.json")


def polarizations():
    return _load("polarizations.json")


def involutions():
    return _load("involutions.json")


def contractions():
    return _load("contractions.json")


def maps():
    return _load("maps.json")


def fractions_from(num_den) -> list[Fraction]:
    """{"num": [...], "den": d} -> list of Fractions."""
    return [Fraction(x, num_den["den"]) for x in num_den["num"]]


def available() -> bool:
    """True when all fixture files are present in the active data dir."""
    names = [
        "reference_frame.json",
        "chamber_seeds.json",
        "polarizations.json",
        "involutions.json",
        "contractions.json",
        "maps.json",
    ]
    return all(os.path.exists(os.path.join(data_dir(), n)) for n in names)
