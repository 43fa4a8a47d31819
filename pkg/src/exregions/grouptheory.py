"""Finite presentations, abelianization via Smith normal form,
Reidemeister-Schreier index-2 kernels, and verification of the manifold
group identifications using exact matrix evaluation over Q(z) as the
word-problem oracle for the marked groups.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .apnum import Mat2, eval_word
from .catalog import RegionRecord
from .exactfield import region_field
from .words import Word


class GroupError(Exception):
    pass


@dataclass(frozen=True)
class Presentation:
    generators: tuple[str, ...]
    relators: tuple[Word, ...]

    def __post_init__(self):
        for rel in self.relators:
            if not rel.generators_used() <= set(range(len(self.generators))):
                raise GroupError("relator uses a generator index out of range")

    def exponent_matrix(self) -> list[list[int]]:
        """Rows = relators, columns = generators (exponent sums)."""
        return [[rel.exponent_sum(g) for g in range(len(self.generators))]
                for rel in self.relators]


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

def smith_normal_form(matrix: list[list[int]]):
    """(D, U, V) with U*A*V = D diagonal, d1 | d2 | ..., U and V unimodular."""
    a = [[int(x) for x in row] for row in matrix]
    m = len(a)
    n = len(a[0]) if m else 0
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    v = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_op(i, j, f):  # row_i -= f*row_j
        a[i] = [x - f * y for x, y in zip(a[i], a[j])]
        u[i] = [x - f * y for x, y in zip(u[i], u[j])]

    def col_op(i, j, f):  # col_i -= f*col_j
        for row in a:
            row[i] -= f * row[j]
        for row in v:
            row[i] -= f * row[j]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    k = 0
    while k < min(m, n):
        # pivot: minimal nonzero absolute value in the remaining block
        pivot = None
        for i in range(k, m):
            for j in range(k, n):
                if a[i][j] != 0 and (pivot is None
                                     or abs(a[i][j]) < abs(a[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(k, pivot[0])
        swap_cols(k, pivot[1])
        if a[k][k] < 0:
            negate_row(k)
        dirty = False
        for i in range(k + 1, m):
            if a[i][k]:
                row_op(i, k, a[i][k] // a[k][k])
                if a[i][k]:
                    dirty = True
        for j in range(k + 1, n):
            if a[k][j]:
                col_op(j, k, a[k][j] // a[k][k])
                if a[k][j]:
                    dirty = True
        if dirty:
            continue
        # enforce divisibility: fold any non-multiple into the pivot row
        bad = None
        for i in range(k + 1, m):
            for j in range(k + 1, n):
                if a[i][j] % a[k][k]:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            row_op(k, bad, -1)
            continue
        k += 1
    return a, u, v


def invariant_factors(matrix: list[list[int]], n_generators: int) -> list[int]:
    """Invariant factors > 1 plus one 0 per free rank unit."""
    if not matrix:
        return [0] * n_generators
    d, _, _ = smith_normal_form(matrix)
    diag = [d[i][i] for i in range(min(len(d), len(d[0])))]
    rank = sum(1 for x in diag if x != 0)
    torsion = [x for x in diag if x > 1]
    return torsion + [0] * (n_generators - rank)


def abelianization(pres: Presentation) -> list[int]:
    return invariant_factors(pres.exponent_matrix(), len(pres.generators))


def lattice_contains(matrix_cols: list[list[int]], vec: list[int]) -> bool:
    """Is vec an integer combination of the columns of the matrix?"""
    if not matrix_cols:
        return all(x == 0 for x in vec)
    dim = len(matrix_cols[0])
    rows = [[col[i] for col in matrix_cols] for i in range(dim)]
    d, u, _ = smith_normal_form(rows)
    # solve D w = U v
    uv = [sum(u[i][j] * vec[j] for j in range(dim)) for i in range(dim)]
    ncols = len(matrix_cols)
    for i in range(dim):
        di = d[i][i] if i < min(dim, ncols) else 0
        if di == 0:
            if uv[i] != 0:
                return False
        elif uv[i] % di:
            return False
    return True


# ---------------------------------------------------------------------------
# Reidemeister-Schreier for index-2 subgroups
# ---------------------------------------------------------------------------

def rs_index2_kernel(pres: Presentation, parity: dict[str, int]) -> Presentation:
    """Presentation of the kernel of the parity map onto Z/2, on Schreier
    generators over the transversal {1, t0} with t0 the first odd
    generator; Tietze-simplified by eliminating generators defined by
    length-1 and length-2 relators."""
    par = [parity[g] & 1 for g in pres.generators]
    if not any(par):
        raise GroupError("parity map is not surjective (no odd generator)")
    for rel in pres.relators:
        if sum(e * par[g] for g, e in rel) % 2:
            raise GroupError("parity is not a homomorphism: relator has odd sum")
    t0 = par.index(1)

    # Schreier generators x_{t,g} = t g rep(tg)^-1; (0, t0) is trivial
    names: dict[tuple[int, int], int] = {}
    labels: list[str] = []
    for g, name in enumerate(pres.generators):
        for t in (0, 1):
            if t == 0 and g == t0:
                continue
            names[(t, g)] = len(labels)
            labels.append(f"{name}{t}")

    def rewrite(rel: Word, start: int) -> Word:
        runs = []
        coset = start
        for g, e in rel:
            for _ in range(abs(e)):
                if e > 0:
                    if not (coset == 0 and g == t0):
                        runs.append((names[(coset, g)], 1))
                    coset ^= par[g]
                else:
                    coset ^= par[g]
                    if not (coset == 0 and g == t0):
                        runs.append((names[(coset, g)], -1))
        if coset != start:
            raise GroupError("relator does not fix the coset (parity bug)")
        return Word(runs)

    relators = []
    for rel in pres.relators:
        for t in (0, 1):
            w = rewrite(rel, t)
            if not w.is_empty():
                relators.append(w)
    return tietze_simplify(Presentation(tuple(labels), tuple(relators)))


def tietze_simplify(pres: Presentation) -> Presentation:
    """Eliminate generators defined by length-1 relators (g = 1) and
    length-2 relators (g = h^k expressible with |exponents| = 1)."""
    gens = list(pres.generators)
    rels = [r for r in pres.relators if not r.is_empty()]
    changed = True
    while changed:
        changed = False
        substitution = None
        for rel in rels:
            letters = rel.letters
            if len(letters) == 1 and abs(letters[0][1]) == 1:
                substitution = (letters[0][0], Word())
                break
            if (len(letters) == 2 and abs(letters[0][1]) == 1):
                g, e = letters[0]
                rest = Word([letters[1]])
                substitution = (g, (rest.inverse() if e == 1 else rest))
                break
            if (len(letters) == 2 and abs(letters[1][1]) == 1):
                g, e = letters[1]
                rest = Word([letters[0]])
                substitution = (g, (rest.inverse() if e == 1 else rest))
                break
        if substitution is None:
            break
        gone, image = substitution
        images = [Word([(g, 1)]) if g != gone else image
                  for g in range(len(gens))]
        new_rels = []
        for rel in rels:
            w = rel.substitute(images)
            if not w.is_empty():
                new_rels.append(w)
        # reindex: drop the eliminated generator
        keep = [g for g in range(len(gens)) if g != gone]
        remap = {g: i for i, g in enumerate(keep)}
        rels = [Word([(remap[g], e) for g, e in rel]) for rel in new_rels]
        gens = [gens[g] for g in keep]
        changed = True
    # dedupe relators (up to nothing fancier than equality)
    seen = set()
    out = []
    for rel in rels:
        if rel not in seen:
            seen.add(rel)
            out.append(rel)
    return Presentation(tuple(gens), tuple(out))


# ---------------------------------------------------------------------------
# Homomorphism verification against the exact matrix oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomCertificate:
    region: str
    relator_signs: tuple[int, ...]
    generator_roundtrip: dict
    surjective: bool

    def __bool__(self):
        return self.surjective and all(s in (1, -1) for s in self.relator_signs)


def _exact_sign(m: Mat2, where: str) -> int:
    from .exactfield import NFElement

    for sign in (1, -1):
        target = Mat2.identity().scale(sign)
        ok = True
        for a, b in zip(m.entries(), target.entries()):
            diff = a - b
            if isinstance(diff, NFElement):
                if not diff.is_zero():
                    ok = False
                    break
            elif diff != 0:
                ok = False
                break
        if ok:
            return sign
    raise GroupError(f"{where}: image is not +-I")


def verify_hom_kills_relators(source: Presentation,
                              images: dict[str, Word],
                              target_region: RegionRecord,
                              inverse_images: Optional[dict[str, Word]] = None
                              ) -> HomCertificate:
    """Check that mapping each source generator to its image word in
    (f, w) kills every source relator exactly (+-I over Q(z)), and that
    the map is surjective: composing the inverse words with the images
    reproduces f and w up to sign."""
    rf = region_field(target_region)
    image_words = []
    for g in source.generators:
        if g not in images:
            raise GroupError(f"no image for generator {g}")
        image_words.append(images[g])
    signs = []
    for rel in source.relators:
        composed = rel.substitute(image_words)
        m = eval_word(composed, rf.images)
        signs.append(_exact_sign(m, f"{target_region.name}: relator image"))
    roundtrip = {}
    surjective = True
    if inverse_images is not None:
        marked = {"f": rf.f2, "w": rf.w2}
        for name, word in inverse_images.items():
            composed = word.substitute(image_words)
            m = eval_word(composed, rf.images)
            target = marked[name]
            diff_plus = all(_is_zero_entry(a - b) for a, b in
                            zip(m.entries(), target.entries()))
            diff_minus = all(_is_zero_entry(a + b) for a, b in
                             zip(m.entries(), target.entries()))
            if diff_plus:
                roundtrip[name] = 1
            elif diff_minus:
                roundtrip[name] = -1
            else:
                roundtrip[name] = 0
                surjective = False
    return HomCertificate(region=target_region.name, relator_signs=tuple(signs),
                          generator_roundtrip=roundtrip, surjective=surjective)


def _is_zero_entry(x) -> bool:
    from .exactfield import NFElement

    if isinstance(x, NFElement):
        return x.is_zero()
    return x == 0


# ---------------------------------------------------------------------------
# Order-2 automorphism check at the abelianization level
# ---------------------------------------------------------------------------

def check_automorphism_order2(pres: Presentation,
                              images: dict[str, Word]) -> bool:
    """Necessary conditions for an order-2 automorphism: the induced map
    on the free abelianization is unimodular, preserves the relator
    lattice, and squares to the identity modulo that lattice."""
    n = len(pres.generators)
    img_words = []
    for g in pres.generators:
        if g not in images:
            return False
        img_words.append(images[g])
    # induced matrix: column j = exponent vector of the image of gen j
    mat = [[img_words[j].exponent_sum(i) for j in range(n)] for i in range(n)]
    det = _det_int(mat)
    if det not in (1, -1):
        return False
    rel_cols = [[rel.exponent_sum(i) for i in range(n)] for rel in pres.relators]
    # lattice invariance: M * (each relator vector) stays in the lattice
    for col in rel_cols:
        mcol = [sum(mat[i][j] * col[j] for j in range(n)) for i in range(n)]
        if not lattice_contains(rel_cols, mcol):
            return False
    # psi^2 = identity on the abelianization
    m2 = [[sum(mat[i][k] * mat[k][j] for k in range(n)) for j in range(n)]
          for i in range(n)]
    for j in range(n):
        diff = [m2[i][j] - (1 if i == j else 0) for i in range(n)]
        if not lattice_contains(rel_cols, diff):
            return False
    return True


def _det_int(mat: list[list[int]]) -> int:
    """Integer determinant by fraction-free Gaussian elimination."""
    a = [row[:] for row in mat]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]
