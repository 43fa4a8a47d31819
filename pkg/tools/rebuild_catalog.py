#!/usr/bin/env python3
"""Regenerate src/exregions/data/regions.json.

The table constants below (words, box for X3, minimal polynomials,
trace polynomials, census data) are transcribed inputs.  The six boxes
that are not printed anywhere are reconstructed here: rectangles of
half-width 5e-4 around the (L', D', R') centers recomputed from the
exact field data, with branches fixed by |a| > 1, |c| > 1.  Rerunning
this script must reproduce the checked-in file byte for byte.
"""

import json
import pathlib
import sys

import mpmath
from mpmath import mp

SRC = pathlib.Path(__file__).resolve().parent.parent / "src"
sys.path.insert(0, str(SRC))

from exregions.exactfield import derived_center  # noqa: E402

HALF_WIDTH = 5  # units of 1e-4


RAW = [
    {
        "name": "X0",
        "r1": "fwf^-1w^2f^-1wfw^2",
        "r2": "f^-1wfwfw^-1fwfw",
        "z_minpoly": [1, 0, 2, 0, 6, 0, 2, 0, 1],
        "z_approx": ["0.853230697", "-1.252448658"],
        "tr1": [0, -1, 0, -6, 0, -2, 0, -1],
        "tr2": "tr1",
        "tr3": ["0", "0", "-5/2", "0", "-1", "0", "-1/2"],
        "itf_minpoly": [3, 0, 1],
        "itf_approx": ["0", "1.732050808"],
    },
    {
        "name": "X1",
        "r1": "f^-2wf^-1w^-1f^-1w^-1fw^-1f^-1w^-1f^-1wf^-2w^2",
        "r2": "f^-2w^2f^-1wfwfw^-1fwfwf^-1w^2",
        "z_minpoly": [1, -2, 5, -4, 7, -4, 5, -2, 1],
        "z_approx": ["0.904047196", "-1.471654224"],
        "tr1": [2, -4, 4, -7, 4, -5, 2, -1],
        "tr2": "tr1",
        "tr3": "tr1",
        "itf_minpoly": [1, -2, 1, -2, 1],
        "itf_approx": ["-0.207106781", "0.978318343"],
        "census": {
            "manifold": "v2678(2,1)",
            "h1": [7, 7],
            "volume": "4.11696874",
            "l_min": "1.0930",
            "generators": ["a", "b"],
            "relators": [
                "a^2b^2aba^-1ba^-1b^-1a^-1ba^-1bab^2",
                "ab^-1ab^-1a^-1b^-1ab^-1aba^2b^2a^2b",
            ],
            "iso_to_census": {"f": "a^-1", "w": "b"},
            "iso_to_marked": {"a": "f^-1", "b": "w"},
        },
    },
    {
        "name": "X2",
        "r1": "f^-1wfwfw^-1f^2w^-1fwfwf^-1w^2",
        "r2": "f^-2wf^-2w^2f^-1wfwfwf^-1w^2",
        "z_minpoly": [1, -2, 4, -2, 1],
        "z_approx": ["0.742934136", "-1.529085514"],
        "tr1": [2, -3, 2, -1],
        "tr2": "tr1",
        "tr3": "tr1",
        "itf_minpoly": [1, 0, 1],
        "itf_approx": ["0", "1"],
        "census": {
            "manifold": "s778(-3,1)",
            "h1": [4, 12],
            "volume": "3.66386238",
            "l_min": "1.061",
            "generators": ["a", "b"],
            "relators": [
                "ab^-1aba^2b^2ab^2a^2bab^-1",
                "ab^2a^2ba^2b^2aba^-1ba^-1b",
            ],
            "iso_to_census": {"f": "a", "w": "b^-1"},
            "iso_to_marked": {"a": "f", "b": "w^-1"},
        },
    },
    {
        "name": "X3",
        "r1": ("f^-2wfwf^-2w^2f^-1w^-1f^-1wf^-1w^-1(fw^-1f^-1w^-1f)^2"
               "w^-1f^-1wf^-1w^-1f^-1w^2"),
        "r2": ("f^-2wfwf^-1wf(w^-1fwfw^-1)^2fwf^-1wfwf^-2w^2"
               "f^-1w^-1f^-1w^2"),
        "z_minpoly": [1, -8, 35, -107, 261, -538, 972, -1565, 2282, -3034,
                      3706, -4171, 4339, -4171, 3706, -3034, 2282, -1565,
                      972, -538, 261, -107, 35, -8, 1],
        "z_approx": ["1.404292212", "-1.179267298"],
        "tr1": [8, -34, 107, -261, 538, -972, 1565, -2282, 3034, -3706,
                4171, -4339, 4171, -3706, 3034, -2282, 1565, -972, 538,
                -261, 107, -35, 8, -1],
        "tr2": "tr1",
        "tr3": "tr1",
        "itf_minpoly": [-337, -1847, -3405, -2445, -13, 1054, 823, 489,
                        257, 91, 23, 6, 1],
        "itf_approx": ["0.632778000", "-3.019170376"],
        "box": {
            "Lp": [["0.58117", "0.58160"], ["-3.31221", "-3.31190"]],
            "Dp": [["1.15644", "1.15683"], ["-2.75628", "-2.75573"]],
            "Rp": [["1.40420", "1.40454"], ["-1.17968", "-1.17919"]],
        },
    },
    {
        "name": "X4",
        "r1": "f^-2wfwf^-1(wfw^-1f)^2wf^-1wfwf^-2w^2(f^-1w^-1f^-1w)^2w",
        "r2": ("f^-1(f^-1wfw)^2f^-2w^2f^-1w^-1f^-1w(f^-1w^-1fw^-1)^2"
               "f^-1wf^-1w^-1f^-1w^2"),
        "z_minpoly": [1, -3, 5, -4, 5, -3, 1],
        "z_approx": ["1.354619901", "-1.225125454"],
        "tr1": [3, -4, 4, -5, 3, -1],
        "tr2": "tr1",
        "tr3": "tr1",
        "itf_minpoly": [-2, -1, 0, 1],
        "itf_approx": ["-0.760689853", "0.857873626"],
        "census": {
            "manifold": "m369(-1,3)",
            "h1": [4, 12],
            "volume": "7.517689",
            "l_min": "1.2046",
            "generators": ["x", "y"],
            "relators": [
                "(yx^-1y^-1x^-1)^2yx^2y^2x^3yxyxy^-1xyxy^-1xyxyx^3y^2x^2",
                "(yxy^-1x)^2yxyx^3(y^2x^2y^2x^3)^2yxyxy^-1xyxy^-1xyx",
                "y^-1x^-3(y^-1x^-1)^2yx^-1y^-1x^-1yx^2y^2x^3yxyx^3y^2x^2(yx^-1y^-1x^-1)^2",
            ],
            "iso_to_census": {"f": "x", "w": "y^-1x^-1"},
            "iso_to_marked": {"x": "f", "y": "f^-1w^-1"},
            "cover_chain": {
                "pi1M": {
                    "generators": ["a", "b", "c"],
                    "relators": ["ab^-1a^-1c^2bc", "abcb^3a^-1c^-1",
                                 "acbc^-1b^-1cbacb"],
                },
                "phi": {"a": 1, "b": 0, "c": 0},
                # The second kernel relator is stored with one c-exponent
                # corrected (the doubly-repeated group ends ...bc^3bc^2, not
                # (bc^2bc^3bc^3bc^3)^2): with the verbatim printed word the
                # two homology computations of this chain are inconsistent,
                # which this pipeline detects; the corrected word restores
                # agreement at every level checked (see repository notes).
                "printed_kernel": {
                    "generators": ["b", "c"],
                    "relators": [
                        "bcb^3cbc^-1b^-1cbc^-1b^-1cbc^2(bc^3)^2bc^2"
                        "bcb^-1c^-1bcb^-1c^-1",
                        "cbc^-1b^-1cbc^-1b^-1cbc^2(bc^3)^2bc^2bc^3bc^3"
                        "bc^3bc^2bc^3bc^3bc^2bcb^-1c^-1bcb^-1c^-1b",
                    ],
                },
                "psi": {"c": "c^-1", "b": "c^3b"},
                "H": {
                    "generators": ["b", "c", "t"],
                    "relators": [
                        "bcb^3cbc^-1b^-1cbc^-1b^-1cbc^2(bc^3)^2bc^2"
                        "bcb^-1c^-1bcb^-1c^-1",
                        "cbc^-1b^-1cbc^-1b^-1cbc^2(bc^3)^2bc^2bc^3bc^3"
                        "bc^3bc^2bc^3bc^3bc^2bcb^-1c^-1bcb^-1c^-1b",
                        "tct^-1c", "tbt^-1b^-1c^-3", "t^2",
                    ],
                },
                "mu": {"b": 1, "c": 0, "t": 1},
            },
        },
    },
    {
        "name": "X5",
        "r1": "f^-1wf^-1w^-1f^-1wf^-1wfwfw^-1fwfw",
        "r2": "f^-1wfwfw^-1fw^-1f^-1w^-1fw^-1fwfw",
        "z_minpoly": [1, 0, 2, 0, 7, 0, -4, 0, 7, 0, 2, 0, 1],
        "z_approx": ["0.868063287", "-1.460023666"],
        "tr1": [0, -1, 0, -7, 0, 4, 0, -7, 0, -2, 0, -1],
        "tr2": "tr1",
        "tr3": ["0", "0", "-3", "0", "2", "0", "-7/2", "0", "-1", "0", "-1/2"],
        "itf_minpoly": [1, 1, -1, 1],
        "itf_approx": ["0.771844506", "1.11514250"],
        "census": {
            # The isomorphism corrects a generator-labeling mismatch: with
            # the relators q1, q2 as printed, the map must exchange the
            # roles of a and b relative to the printed table row
            # (f -> ab, w -> b fails to kill q1, q2; the a<->b transposed
            # map verifies exactly).
            "manifold": "s479(-3,1)",
            "h1": [4, 4],
            "volume": "3.17729328",
            "l_min": "1.0595",
            "generators": ["a", "b"],
            "relators": [
                "aba^2b^2a^2bab^-2a^-2b^-2",
                "a^2b^2ab^2a^2bab^-1ab^-1ab",
            ],
            "iso_to_census": {"f": "ba", "w": "a"},
            "iso_to_marked": {"a": "w", "b": "fw^-1"},
        },
    },
    {
        "name": "X6",
        # X6 is the mirror of X5: its quasi-relators are the X5 ones with w
        # inverted, and the solution parameters are the complex conjugates of
        # X5's.  The field data is therefore X5's under the conjugate
        # embedding z -> conj(z).  The mirror-twisted generator -i*conj(z)
        # (minimal polynomial t^12-2t^10+7t^8+4t^6+7t^4-2t^2+1, value
        # 1.460023666-0.868063287i) does NOT satisfy the normal form for the
        # X6 words: the relators fail to evaluate to +-I with that row, which
        # this pipeline detects.  See notes in the repository history.
        "comment": ("z for X6 is the complex conjugate of the X5 generator "
                    "(mirror regions); the X6 quasi-relators are the X5 ones "
                    "with w inverted"),
        "r1": "f^-1w^-1f^-1wf^-1w^-1f^-1w^-1fw^-1fwfw^-1fw^-1",
        "r2": "f^-1w^-1fw^-1fwfwf^-1wfwfw^-1fw^-1",
        "z_minpoly": [1, 0, 2, 0, 7, 0, -4, 0, 7, 0, 2, 0, 1],
        "z_approx": ["0.868063287", "1.460023666"],
        "tr1": [0, -1, 0, -7, 0, 4, 0, -7, 0, -2, 0, -1],
        "tr2": "tr1",
        "tr3": ["0", "0", "-3", "0", "2", "0", "-7/2", "0", "-1", "0", "-1/2"],
        "itf_minpoly": [1, 1, -1, 1],
        "itf_approx": ["0.771844506", "-1.11514250"],
        "census": {
            "manifold": "s479(-3,1)",
            "h1": [4, 4],
            "volume": "3.17729328",
            "l_min": "1.0595",
            "generators": ["a", "b"],
            "relators": [
                "aba^2b^2a^2bab^-2a^-2b^-2",
                "a^2b^2ab^2a^2bab^-1ab^-1ab",
            ],
            "iso_to_census": {},
            "iso_to_marked": {},
        },
    },
]


def round8(x) -> int:
    """Round an mpf to an integer number of 1e-8 units."""
    return int(mpmath.nint(x * 10 ** 8))


def dec(units: int, scale: int = 8) -> str:
    sign = "-" if units < 0 else ""
    units = abs(units)
    whole, frac = divmod(units, 10 ** scale)
    text = f"{sign}{whole}.{str(frac).rjust(scale, '0')}".rstrip("0")
    return text.rstrip(".") if text.endswith(".") else text


def derived_box(center) -> list:
    lo_re = round8(center.re) - HALF_WIDTH * 10 ** 4
    hi_re = round8(center.re) + HALF_WIDTH * 10 ** 4
    lo_im = round8(center.im) - HALF_WIDTH * 10 ** 4
    hi_im = round8(center.im) + HALF_WIDTH * 10 ** 4
    return [[dec(lo_re), dec(hi_re)], [dec(lo_im), dec(hi_im)]]


def main():
    out = {"comment": (
        "Region catalog. Boxes with box_derived=true are reconstructions: "
        "rectangles of half-width 5e-4 around centers recomputed from the "
        "exact field data (see tools/rebuild_catalog.py); only the X3 box "
        "is published."),
        "regions": []}
    for raw in RAW:
        rec = dict(raw)
        if "box" not in rec:
            L, D, R = derived_center(raw, digits=60)
            rec["box"] = {"Lp": derived_box(L), "Dp": derived_box(D),
                          "Rp": derived_box(R)}
            rec["box_derived"] = True
        else:
            rec["box_derived"] = False
        ordered = {"name": rec["name"], "box_derived": rec["box_derived"],
                   "box": rec["box"]}
        for key in ("comment", "r1", "r2", "z_minpoly", "z_approx", "tr1",
                    "tr2", "tr3", "itf_minpoly", "itf_approx", "census"):
            if key in rec:
                ordered[key] = rec[key]
        out["regions"].append(ordered)
    target = SRC / "exregions" / "data" / "regions.json"
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as fh:
        json.dump(out, fh, indent=1)
        fh.write("\n")
    print(f"wrote {target}")
    # sanity: X3's derived center must land inside the published box
    x3 = next(r for r in RAW if r["name"] == "X3")
    L, D, R = derived_center(x3, digits=60)
    from exregions.catalog import load_catalog, get_region
    records = load_catalog(target)
    box3 = get_region(records, "X3").box
    assert box3.contains(L, D, R), "X3 derived center outside the published box"
    print("X3 derived center lies inside the published box: ok")


if __name__ == "__main__":
    main()
