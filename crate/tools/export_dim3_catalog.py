"""Export the 73 arithmetic classes of three-dimensional space groups as a
catalog file, using the symmetry database shipped with spglib.

    pip install spglib
    python3 tools/export_dim3_catalog.py > catalogs/dim3.catalog

Point groups are written in a primitive lattice basis. Space-group types are
counted up to affine equivalence, so each enantiomorphic pair counts once
(219 types in total).
"""

import itertools
import sys
from fractions import Fraction

import numpy as np
import spglib

# second member of each enantiomorphic pair
ENANTIOMORPHS = {78, 95, 96, 145, 153, 154, 170, 172, 179, 181, 213}

# columns: primitive basis vectors in conventional coordinates
F = Fraction
CENTRING = {
    "P": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
    "A": [[1, 0, 0], [0, F(1, 2), F(1, 2)], [0, F(-1, 2), F(1, 2)]],
    "C": [[F(1, 2), F(1, 2), 0], [F(-1, 2), F(1, 2), 0], [0, 0, 1]],
    "I": [[F(-1, 2), F(1, 2), F(1, 2)], [F(1, 2), F(-1, 2), F(1, 2)], [F(1, 2), F(1, 2), F(-1, 2)]],
    "F": [[0, F(1, 2), F(1, 2)], [F(1, 2), 0, F(1, 2)], [F(1, 2), F(1, 2), 0]],
    "R": [[F(2, 3), F(-1, 3), F(-1, 3)], [F(1, 3), F(1, 3), F(-2, 3)], [F(1, 3), F(1, 3), F(1, 3)]],
}

CYCLIC = lambda n: [f"x1^{n}"]
DIHEDRAL = lambda n: [f"x1^{n}", "x2^2", "(x1 x2)^2"]
KLEIN = ["x1^2", "x2^2", "(x1 x2)^2"]


def with_centre(rels, k):
    c = f"x{k}"
    extra = [f"{c}^2"] + [f"x{i} {c} x{i}^-1 {c}^-1" for i in range(1, k)]
    return rels + extra


PRESENTATIONS = {
    "1": ["x1"],
    "-1": CYCLIC(2), "2": CYCLIC(2), "m": CYCLIC(2),
    "3": CYCLIC(3),
    "4": CYCLIC(4), "-4": CYCLIC(4),
    "6": CYCLIC(6), "-6": CYCLIC(6), "-3": CYCLIC(6),
    "2/m": KLEIN, "222": KLEIN, "mm2": KLEIN,
    "mmm": ["x1^2", "x2^2", "x3^2", "(x1 x2)^2", "(x1 x3)^2", "(x2 x3)^2"],
    "4/m": ["x1^4", "x2^2", "x1 x2 x1^-1 x2^-1"],
    "6/m": ["x1^6", "x2^2", "x1 x2 x1^-1 x2^-1"],
    "32": DIHEDRAL(3), "3m": DIHEDRAL(3),
    "422": DIHEDRAL(4), "4mm": DIHEDRAL(4), "-42m": DIHEDRAL(4),
    "-3m": DIHEDRAL(6), "622": DIHEDRAL(6), "6mm": DIHEDRAL(6), "-6m2": DIHEDRAL(6),
    "4/mmm": with_centre(DIHEDRAL(4), 3),
    "6/mmm": with_centre(DIHEDRAL(6), 3),
    "23": ["x1^3", "x2^2", "(x1 x2)^3"],
    "m-3": with_centre(["x1^3", "x2^2", "(x1 x2)^3"], 3),
    "432": ["x1^4", "x2^2", "(x1 x2)^3"], "-43m": ["x1^4", "x2^2", "(x1 x2)^3"],
    "m-3m": with_centre(["x1^4", "x2^2", "(x1 x2)^3"], 3),
}


def to_primitive(rot, centring):
    p = CENTRING[centring]
    pm = [[F(x) for x in row] for row in p]
    det = np.linalg.det(np.array(pm, dtype=float))
    inv = np.linalg.inv(np.array(pm, dtype=float))
    out = np.rint(inv @ np.array(rot, dtype=float) @ np.array(pm, dtype=float)).astype(int)
    check = np.array(inv @ np.array(rot, dtype=float) @ np.array(pm, dtype=float))
    assert abs(det) > 0 and np.allclose(check, out), (rot, centring)
    return tuple(map(tuple, out))


def parse_word(word):
    letters = []
    for tok in word.replace("(", " ( ").replace(")", " ) ").split():
        letters.append(tok)
    return letters


def evaluate(word, gens):
    """Evaluates a relator over matrices; words use the catalog syntax."""
    def atom(tok):
        base, _, power = tok.partition("^")
        m = gens[int(base[1:]) - 1]
        power = int(power) if power else 1
        if power < 0:
            m = np.rint(np.linalg.inv(m)).astype(int)
            power = -power
        return np.linalg.matrix_power(m, power)

    stack = [np.eye(3, dtype=int)]
    tokens = word.replace("(", " ( ").replace(")", " ) ").split()
    i = 0
    while i < len(tokens):
        t = tokens[i]
        if t == "(":
            stack.append(np.eye(3, dtype=int))
        elif t == ")":
            inner = stack.pop()
            power = 1
            if i + 1 < len(tokens) and tokens[i + 1].startswith("^"):
                power = int(tokens[i + 1][1:])
                i += 1
            stack[-1] = stack[-1] @ np.linalg.matrix_power(inner, power)
        elif t.startswith(")^"):
            raise ValueError(t)
        else:
            stack[-1] = stack[-1] @ atom(t)
        i += 1
    return stack[-1]


def normalise_word(word):
    # "(x1 x2)^2" -> tokens "(", "x1", "x2", ")", "^2"
    return word.replace(")^", ") ^")


def generated(gens):
    seen = {tuple(map(tuple, np.eye(3, dtype=int)))}
    frontier = list(seen)
    while frontier:
        x = np.array(frontier.pop())
        for g in gens:
            y = tuple(map(tuple, x @ g))
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return seen


def find_generators(elements, relators):
    k = max(int(tok[1:].split("^")[0]) for r in relators for tok in r.replace("(", " ").replace(")", " ").split()
            if tok.startswith("x"))
    mats = [np.array(e) for e in sorted(elements)]
    words = [normalise_word(r) for r in relators]
    for combo in itertools.product(range(len(mats)), repeat=k):
        gens = [mats[i] for i in combo]
        if all((evaluate(w, gens) == np.eye(3, dtype=int)).all() for w in words):
            if len(generated(gens)) == len(elements):
                return gens
    raise RuntimeError("no generating tuple satisfies the presentation")


def main():
    classes = {}
    seen_types = set()
    for hall in range(1, 531):
        t = spglib.get_spacegroup_type(hall)
        if t.number in seen_types:
            continue
        seen_types.add(t.number)
        sym = spglib.get_symmetry_from_database(hall)
        centring = t.international_short[0]
        rots = {to_primitive(r, centring) for r in sym["rotations"]}
        entry = classes.setdefault(t.arithmetic_crystal_class_number, {
            "symbol": t.arithmetic_crystal_class_symbol,
            "pointgroup": t.pointgroup_international,
            "rotations": rots,
            "types": [],
        })
        assert entry["rotations"] == rots, (t.number, entry["symbol"])
        if t.number not in ENANTIOMORPHS:
            entry["types"].append(t.international_short)

    assert len(seen_types) == 230 and len(classes) == 73
    qorder = []
    for n in sorted(classes):
        pg = classes[n]["pointgroup"]
        if pg not in qorder:
            qorder.append(pg)
    total = sum(len(c["types"]) for c in classes.values())
    assert total == 219, total

    out = sys.stdout
    out.write("# Arithmetic classes of three-dimensional space groups, exported from the\n")
    out.write(f"# spglib {spglib.__version__} symmetry database by tools/export_dim3_catalog.py.\n")
    out.write("# Point groups act on a primitive lattice basis.\n\ndimension 3\n")
    for qi, pg in enumerate(qorder, start=1):
        relators = PRESENTATIONS[pg]
        out.write(f"\nqclass {qi}                                  # {pg}\n")
        out.write(f"  relators: {' ; '.join(relators)}\n")
        zi = 0
        for n in sorted(classes):
            c = classes[n]
            if c["pointgroup"] != pg:
                continue
            zi += 1
            gens = find_generators(c["rotations"], relators)
            out.write(f'  zclass {zi} label "{c["symbol"]}" spacegroups {len(c["types"])}'
                      f'     # {" ".join(c["types"])}\n')
            for g in gens:
                out.write("    gen " + " / ".join(" ".join(str(int(x)) for x in row) for row in g) + "\n")


if __name__ == "__main__":
    main()
