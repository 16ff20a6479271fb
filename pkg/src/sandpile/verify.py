"""Fast self-check suite over tiny domains, used by the ``verify`` command.

Each check is independent and prints one PASS/FAIL line; the suite returns
False (CLI exit 1) if anything fails. These are the structural invariants
the package is built on, kept cheap enough to run routinely.
"""

import numpy as np

from .domain import Configuration, rectangle
from .dynamics import frame, verify_periodicity
from .extended import ExtendedConfiguration, eta, floor_project, geodesic_frame
from .group import (group_add, group_order, identity, is_recurrent,
                    recurrent_configurations)
from .harmonic import BASIS_IDS, basis, check_harmonic, linear_combine
from .potential import build_potential, creutz_pattern, normalized_restriction
from .relax import apply_laplacian, reference_relax, relax
from .stochastic import run as stochastic_run
from .stochastic import variation_of_information


def check_domain_counts():
    d = rectangle(255, 255)
    return d.num_vertices == 255 * 255 and int(d.is_boundary.sum()) == 1016


def check_neighbor_symmetry():
    from .domain import cshape
    d = cshape(21, 21, -3, 6)
    for v in range(d.num_vertices):
        for u in d.nbr[v]:
            if u >= 0 and v not in d.nbr[u]:
                return False
    return int(d.degree.sum()) % 2 == 0


def check_abelian_orders():
    rng = np.random.default_rng(11)
    d = rectangle(9, 9)
    for _ in range(20):
        c = Configuration(d, rng.integers(0, 16, (9, 9)))
        results = [reference_relax(c, order=o, seed=s)
                   for o, s in (("fifo", 0), ("lifo", 0), ("random", 1),
                                ("random", 2))]
        fast = relax(c)
        for stable, odo in results:
            if stable != fast[0] or not np.array_equal(odo.grid, fast[1].grid):
                return False
    return True


def check_odometer_identity():
    rng = np.random.default_rng(5)
    d = rectangle(11, 11)
    for _ in range(50):
        c = Configuration(d, rng.integers(0, 24, (11, 11)))
        stable, odo = relax(c)
        if not np.array_equal(stable.flat(),
                              c.flat() + apply_laplacian(d, odo.flat())):
            return False
    return True


def check_group_orders():
    expected = {(1, 1): 4, (2, 1): 15, (2, 2): 192}
    for (n, m), order in expected.items():
        d = rectangle(n, m)
        if group_order(d) != order:
            return False
        if len(recurrent_configurations(d)) != order:
            return False
    return True


def check_identity_laws():
    d = rectangle(2, 1)
    ident = identity(d)
    rec = recurrent_configurations(d)
    for c in rec:
        if group_add(ident, c) != Configuration(d, c.grid):
            return False
    if not is_recurrent(ident):
        return False
    a, b, c = rec[1], rec[7], rec[11]
    assoc = group_add(group_add(a, b), c) == group_add(a, group_add(b, c))
    comm = group_add(a, b) == group_add(b, a)
    return assoc and comm


def check_burning_examples():
    d12 = rectangle(2, 1)
    if is_recurrent(Configuration.zeros(d12)):
        return False
    if not is_recurrent(Configuration.filled(d12, 3)):
        return False
    return is_recurrent(Configuration.zeros(rectangle(1, 1)))


def check_basis_harmonic():
    return all(check_harmonic(basis(b), 20) for b in BASIS_IDS)


def check_fold_equivalence():
    for n in (3, 5, 9, 15):
        d = rectangle(n, n)
        for b in BASIS_IDS:
            p = build_potential(basis(b), d)
            lap = -apply_laplacian(d, normalized_restriction(basis(b), d))
            if not np.array_equal(p.flat(), lap):
                return False
    return True


def check_creutz_pattern():
    d = rectangle(3, 3)
    return creutz_pattern(d).x.tolist() == [[2, 1, 2], [1, 0, 1], [2, 1, 2]]


def check_periodicity():
    d = rectangle(15, 15)
    ident = identity(d)
    for b in BASIS_IDS:
        ok, _ = verify_periodicity(ident, build_potential(basis(b), d))
        if not ok:
            return False
    return True


def check_extended_geodesics():
    d = rectangle(9, 9)
    ident = identity(d)
    start = ExtendedConfiguration.from_configuration(ident)
    from fractions import Fraction
    for b in ("1a", "2a", "4a"):
        p = build_potential(basis(b), d)
        if geodesic_frame(start, p, 1) != start:
            return False
        for t in (Fraction(1, 3), Fraction(3, 7)):
            if floor_project(geodesic_frame(start, p, t)) != frame(ident, p, t):
                return False
    return True


def check_eta_kernel():
    hint = linear_combine([(2, basis("2b")), (3, basis("1a")), (1, basis("0"))])
    for d in (rectangle(2, 1), rectangle(5, 5)):
        ident = identity(d)
        if floor_project(eta(hint, d)) != Configuration(d, ident.grid):
            return False
    return True


def check_stochastic_reproducibility():
    d = rectangle(9, 9)
    ident = identity(d)
    p = build_potential(basis("2a"), d)
    a = stochastic_run(ident, p, 2, seed=123)
    b = stochastic_run(ident, p, 2, seed=123)
    if not (np.array_equal(a.sizes, b.sizes) and a.final == b.final):
        return False
    return variation_of_information(ident, ident) == 0.0


CHECKS = [
    ("domain vertex and boundary counts", check_domain_counts),
    ("neighbor relation symmetric, degree sum even", check_neighbor_symmetry),
    ("relaxation independent of toppling order", check_abelian_orders),
    ("odometer stabilization identity", check_odometer_identity),
    ("group orders 4 / 15 / 192 with enumeration", check_group_orders),
    ("identity laws on two vertices", check_identity_laws),
    ("burning test known cases", check_burning_examples),
    ("basis fields discretely harmonic", check_basis_harmonic),
    ("potential fold equals -laplacian", check_fold_equivalence),
    ("boundary drop pattern edge 1 corner 2", check_creutz_pattern),
    ("unit periodicity of identity dynamics", check_periodicity),
    ("closed geodesics and floor projection", check_extended_geodesics),
    ("integer harmonics map to the identity", check_eta_kernel),
    ("seeded runs reproduce bitwise", check_stochastic_reproducibility),
]


def run_verify(report=print):
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok = bool(fn())
        except Exception as exc:  # a crash is a failure with a reason
            ok = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        all_ok = all_ok and ok
        report(f"{'PASS' if ok else 'FAIL'}  {name}")
    return all_ok
