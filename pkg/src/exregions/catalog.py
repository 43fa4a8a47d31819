"""Region catalog: boxes, quasi-relators and published algebraic data.

The bundled file `data/regions.json` is the single source of table
constants for the rest of the library.  Only the X3 box is printed in
the source tables; the other six boxes are reconstructions (rectangles
of half-width 5e-4 around centers recomputed from the exact field data)
and are labeled as such in the file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Optional

import mpmath
from mpmath import mp

from ._rat import parse_decimal, QQ
from .apnum import APComplex, _bits
from .recognize import IntPoly, refine_root, RecognitionError
from .words import Word, parse_word

REGION_NAMES = ("X0", "X1", "X2", "X3", "X4", "X5", "X6")
MARKED_GENERATORS = ("f", "w")


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in C with exact rational bounds."""
    re_min: object
    re_max: object
    im_min: object
    im_max: object

    def __post_init__(self):
        if self.re_min > self.re_max or self.im_min > self.im_max:
            raise CatalogError("rectangle bounds out of order")

    def midpoint(self, digits: int) -> APComplex:
        re = (self.re_min + self.re_max) / 2
        im = (self.im_min + self.im_max) / 2
        with mp.workprec(_bits(digits)):
            value = mpmath.mpc(mpmath.mpf(int(re.numerator)) / int(re.denominator),
                               mpmath.mpf(int(im.numerator)) / int(im.denominator))
        return APComplex.from_mpc(value, digits)

    def contains(self, value, scale: float = 1.0) -> bool:
        """Membership, with the rectangle enlarged about its center by `scale`."""
        z = value.to_mpc() if isinstance(value, APComplex) else mpmath.mpc(value)
        cr = (self.re_min + self.re_max) / 2
        ci = (self.im_min + self.im_max) / 2
        hr = (self.re_max - self.re_min) / 2
        hi = (self.im_max - self.im_min) / 2
        fr = mpmath.mpf(int(cr.numerator)) / int(cr.denominator)
        fi = mpmath.mpf(int(ci.numerator)) / int(ci.denominator)
        wr = scale * mpmath.mpf(int(hr.numerator)) / int(hr.denominator)
        wi = scale * mpmath.mpf(int(hi.numerator)) / int(hi.denominator)
        return abs(z.real - fr) <= wr and abs(z.imag - fi) <= wi


@dataclass(frozen=True)
class BoxRegion:
    name: str
    Lp: Rect
    Dp: Rect
    Rp: Rect

    def rect(self, param: str) -> Rect:
        return getattr(self, param)

    def contains(self, Lp, Dp, Rp, scale: float = 1.0) -> bool:
        return (self.Lp.contains(Lp, scale) and self.Dp.contains(Dp, scale)
                and self.Rp.contains(Rp, scale))


@dataclass(frozen=True)
class CensusData:
    manifold: str
    h1: tuple[int, ...]
    volume: str
    l_min: str
    generators: tuple[str, ...]
    relators: tuple[Word, ...]
    # images of the marked generators f, w as words over the census
    # generators, and of the census generators as words over f, w
    iso_to_census: dict
    iso_to_marked: dict
    cover_chain: Optional[dict] = None


@dataclass(frozen=True)
class RegionRecord:
    name: str
    box: BoxRegion
    box_derived: bool
    r1: Word
    r2: Word
    z_minpoly: IntPoly
    z_approx: tuple  # exact decimal pair (QQ, QQ)
    tr1: tuple
    tr2: tuple
    tr3: tuple
    itf_minpoly: IntPoly
    itf_approx: tuple
    census: Optional[CensusData] = None

    @property
    def quasi_relators(self) -> tuple[Word, Word]:
        return (self.r1, self.r2)

    def z_seed(self, digits: int = 40) -> APComplex:
        """z_approx refined against z_minpoly to `digits` digits."""
        seed = mpmath.mpc(float(self.z_approx[0]), float(self.z_approx[1]))
        return refine_root(self.z_minpoly, seed, digits, max_drift=1e-6)

    def itf_seed(self, digits: int = 40) -> APComplex:
        seed = mpmath.mpc(float(self.itf_approx[0]), float(self.itf_approx[1]))
        return refine_root(self.itf_minpoly, seed, digits, max_drift=1e-6)


def _parse_rect(pairs) -> Rect:
    (re_min, re_max), (im_min, im_max) = pairs
    return Rect(parse_decimal(re_min), parse_decimal(re_max),
                parse_decimal(im_min), parse_decimal(im_max))


def _parse_ratlist(values) -> tuple:
    out = []
    for v in values:
        if isinstance(v, str):
            if "/" in v:
                num, den = v.split("/")
                out.append(QQ(int(num), int(den)))
            else:
                out.append(QQ(int(v)))
        else:
            out.append(QQ(int(v)))
    return tuple(out)


def _parse_census(obj, region: str) -> CensusData:
    gens = tuple(obj.get("generators", ("a", "b")))
    relators = tuple(parse_word(text, gens) for text in obj["relators"])
    iso_to_census = {g: parse_word(text, gens)
                     for g, text in obj["iso_to_census"].items()}
    iso_to_marked = {g: parse_word(text, MARKED_GENERATORS)
                     for g, text in obj["iso_to_marked"].items()}
    return CensusData(
        manifold=obj["manifold"],
        h1=tuple(int(x) for x in obj["h1"]),
        volume=obj["volume"],
        l_min=obj["l_min"],
        generators=gens,
        relators=relators,
        iso_to_census=iso_to_census,
        iso_to_marked=iso_to_marked,
        cover_chain=obj.get("cover_chain"),
    )


def _parse_record(obj) -> RegionRecord:
    name = obj["name"]
    box = BoxRegion(name,
                    _parse_rect(obj["box"]["Lp"]),
                    _parse_rect(obj["box"]["Dp"]),
                    _parse_rect(obj["box"]["Rp"]))
    r1 = parse_word(obj["r1"], MARKED_GENERATORS)
    r2 = parse_word(obj["r2"], MARKED_GENERATORS)
    z_minpoly = IntPoly(obj["z_minpoly"])
    z_approx = (parse_decimal(obj["z_approx"][0]), parse_decimal(obj["z_approx"][1]))
    tr1 = _parse_ratlist(obj["tr1"])
    tr2 = tr1 if obj["tr2"] == "tr1" else _parse_ratlist(obj["tr2"])
    tr3 = tr1 if obj["tr3"] == "tr1" else _parse_ratlist(obj["tr3"])
    itf_minpoly = IntPoly(obj["itf_minpoly"])
    itf_approx = (parse_decimal(obj["itf_approx"][0]),
                  parse_decimal(obj["itf_approx"][1]))
    census = _parse_census(obj["census"], name) if "census" in obj else None
    return RegionRecord(
        name=name, box=box, box_derived=bool(obj.get("box_derived", False)),
        r1=r1, r2=r2, z_minpoly=z_minpoly, z_approx=z_approx,
        tr1=tr1, tr2=tr2, tr3=tr3,
        itf_minpoly=itf_minpoly, itf_approx=itf_approx, census=census)


def _validate_record(rec: RegionRecord) -> None:
    for label, word in (("r1", rec.r1), ("r2", rec.r2)):
        used = word.generators_used()
        if not used <= {0, 1}:
            raise CatalogError(f"{rec.name}: {label} uses generators beyond f, w")
        if word.is_empty():
            raise CatalogError(f"{rec.name}: {label} is empty")
    if rec.z_minpoly.degree < 1:
        raise CatalogError(f"{rec.name}: z_minpoly must be nonconstant")
    try:
        rec.z_seed(30)
    except RecognitionError as exc:
        raise CatalogError(
            f"{rec.name}: z_approx is not a root of z_minpoly to 1e-6: {exc}")
    try:
        rec.itf_seed(30)
    except RecognitionError as exc:
        raise CatalogError(
            f"{rec.name}: itf_approx is not a root of itf_minpoly to 1e-6: {exc}")
    for label, poly in (("tr1", rec.tr1), ("tr2", rec.tr2), ("tr3", rec.tr3)):
        if len(poly) > rec.z_minpoly.degree:
            raise CatalogError(
                f"{rec.name}: {label} has degree >= deg(z_minpoly)")


def load_catalog(path) -> list[RegionRecord]:
    """Load and validate a region catalog file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CatalogError(f"{path}: not valid JSON: {exc}")
    records = []
    for i, obj in enumerate(data["regions"]):
        try:
            rec = _parse_record(obj)
        except (KeyError, ValueError) as exc:
            name = obj.get("name", f"record #{i}")
            raise CatalogError(f"{name}: {exc}") from exc
        _validate_record(rec)
        records.append(rec)
    return records


def bundled_catalog_path():
    return resources.files("exregions").joinpath("data/regions.json")


def load_bundled() -> list[RegionRecord]:
    with resources.as_file(bundled_catalog_path()) as path:
        return load_catalog(path)


def get_region(records: list[RegionRecord], name: str) -> RegionRecord:
    for rec in records:
        if rec.name == name:
            return rec
    raise KeyError(f"unknown region {name!r} (have {[r.name for r in records]})")
