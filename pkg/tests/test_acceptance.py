"""Acceptance suite: one pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even
under capture) or directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import io
import itertools
import json
import os
import random
import sys
import tempfile
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hermhecke import weights as W
from hermhecke.cli import main as cli_main
from hermhecke.field import FieldConfig
from hermhecke.filtered import build_model, check_filtration_compatibility, lift_freeness, perturb_lower, verify_certificate
from hermhecke.hecke import HeckeContext, HeckeElement, ModuleElement, coset_reps, leading_decomposition
from hermhecke.hermitian import HermitianForm, gram_valuation, min_subspace_valuation, orbit_invariant, twisted_action
from hermhecke.lattice import (
    MatrixE,
    cartan_chamber,
    cartan_coordinate,
    min_minor_valuation,
    random_gl,
    random_integral,
    random_k0,
    smith_invariants,
)

from oracles import tree_sphere_sizes

SEED = int(os.environ.get("HERMHECKE_SEED", "20240611"))
Q = 3


def _cli(*argv):
    out = io.StringIO()
    code = cli_main(list(argv), stream=out)
    return code, json.loads(out.getvalue())


def criterion_1():
    notes = []
    ok = True
    with tempfile.TemporaryDirectory() as tmp:
        for n, radius, rank in ((2, 3, 2), (3, 1, 4)):
            path = str(Path(tmp) / f"cert_n{n}.json")
            code, res = _cli("certify", "--q", str(Q), "--n", str(n), "--radius", str(radius), "--out", path)
            vcode, vres = _cli("verify", path)
            good = code == 0 and res.get("rank") == rank and vcode == 0 and vres.get("verified") is True
            ok &= good
            notes.append(f"n={n} r={radius} |basis|={res.get('rank')} verify={vres.get('verified')}")
    return ok, "; ".join(notes)


def _leading_sweep(kind: str):
    bad, total = [], 0
    for n, radius in ((2, 2), (3, 1)):
        ctx = HeckeContext(FieldConfig(q=Q, n=n))
        box = W.dominant_box(n, radius)
        for lam, mu in itertools.product(box, repeat=2):
            if kind == "act":
                elem, top = ctx.act_basis(lam, mu), W.add(W.phi_chamber(lam), mu)
            else:
                elem, top = ctx.convolve_basis(lam, mu), W.add(lam, mu)
            dec = leading_decomposition(elem, top)
            total += 1
            c = dec.coefficient
            if not (dec.certified and c > 0 and c.denominator == 1):
                bad.append((n, lam, mu))
    return not bad, f"{total} products, {len(bad)} violations{'' if not bad else ': ' + str(bad[:3])}"


def criterion_2():
    return _leading_sweep("conv")


def criterion_3():
    return _leading_sweep("act")


def criterion_4(samples: int = 500):
    F = FieldConfig(q=Q).local_field
    rng = random.Random(SEED + 4)
    bad = 0
    for d in W.dominant_box(2, 3):
        integral = W.is_integral(d)
        lam = W.from_chamber(d)
        e = W.gl_exponents(d)
        P = MatrixE.t_power_diagonal(F, lam if integral else e)
        for _ in range(samples):
            g = random_k0(F, 2, rng) @ P @ random_k0(F, 2, rng)
            y = twisted_action(random_k0(F, 2, rng), P)
            if integral:
                good = cartan_coordinate(g) == lam and orbit_invariant(HermitianForm(y)) == lam
            else:
                inv = orbit_invariant(y)
                good = cartan_chamber(g) == d and (inv[0] - inv[1],) == d
            bad += not good
    return bad == 0, f"{samples} translates x 2 invariants for each of 4 weights, {bad} mismatches"


def criterion_5(samples: int = 500):
    F = FieldConfig(q=Q).local_field
    rng = random.Random(SEED + 5)
    bad = 0
    for n in (2, 3, 4):
        for _ in range(samples):
            g = random_gl(F, n, rng)
            s = smith_invariants(g)
            bad += any(min_minor_valuation(g, k) != sum(s[:k]) for k in range(1, n + 1))
    return bad == 0, f"{samples} matrices for each n in (2,3,4), {bad} mismatches"


def criterion_6(samples: int = 1000):
    F = FieldConfig(q=Q).local_field
    rng = random.Random(SEED + 6)
    violations, counted = 0, 0
    for d in W.dominant_box(3, 1):
        x = MatrixE.t_power_diagonal(F, W.gl_exponents(d))
        form = twisted_action(random_k0(F, 3, rng), x)
        bounds = {k: min_subspace_valuation(form, k) for k in (1, 2, 3)}
        done = 0
        while done < samples:
            k = 1 + done % 3
            basis = [[random_integral(F, rng, rng.randint(0, 2)) for _ in range(3)] for _ in range(k)]
            try:
                v = gram_valuation(form, basis)
            except ValueError:
                continue  # dependent vectors do not span a rank-k sublattice
            violations += v < bounds[k]
            done += 1
        counted += done
    return violations == 0, f"{counted} sublattices over 4 forms, {violations} violations"


def criterion_7():
    cfg = FieldConfig(q=Q, n=2)
    oracle = tree_sphere_sizes(cfg.local_field.residue, 4)
    sizes = [coset_reps((d,), cfg).size for d in range(5)]
    ok = sizes == oracle and sizes[2:] == [90, 810, 7290]
    return ok, f"family sizes d=0..4 {sizes}, tree spheres {oracle}"


def criterion_8():
    ctx = HeckeContext(FieldConfig(q=Q, n=2))
    box = W.dominant_box(2, 1)
    a = {d: HeckeElement.from_chamber(d) for d in box}
    m = {d: ModuleElement.from_chamber(d) for d in box}
    fails = []
    for d in box:
        if ctx.convolve(a[(0,)], a[d]) != a[d] or ctx.convolve(a[d], a[(0,)]) != a[d]:
            fails.append(("identity", d))
        if ctx.act(a[(0,)], m[d]) != m[d]:
            fails.append(("module identity", d))
    for x, y in itertools.product(box, repeat=2):
        if ctx.convolve(a[x], a[y]) != ctx.convolve(a[y], a[x]):
            fails.append(("commutativity", x, y))
    for x, y, z in itertools.product(box, repeat=3):
        if ctx.act(ctx.convolve(a[x], a[y]), m[z]) != ctx.act(a[x], ctx.act(a[y], m[z])):
            fails.append(("associativity", x, y, z))
    return not fails, f"identity, commutativity, mixed associativity on {len(box)}-element box: {len(fails)} failures"


def criterion_9(trials: int = 20):
    rng = random.Random(SEED + 9)
    notes, ok = [], True
    for n, radius in ((2, 3), (3, 2)):
        model = build_model(FieldConfig(q=Q, n=n), radius)
        basis = lift_freeness(model, W.residue_classes(n)).basis
        good = 0
        for _ in range(trials):
            p = perturb_lower(model, rng, terms=rng.randint(1, 6))
            try:
                cert = lift_freeness(p, W.residue_classes(n))
                good += check_filtration_compatibility(p).ok and cert.basis == basis and verify_certificate(cert, p).ok
            except ValueError:
                pass
        ok &= good == trials
        notes.append(f"n={n} r={radius}: {good}/{trials}")
    return ok, "; ".join(notes)


CRITERIA = {
    1: ("freeness certificates (n=2 r=3 rank 2, n=3 r=1 rank 4)", criterion_1),
    2: ("convolution leading term at lambda+mu", criterion_2),
    3: ("action leading term at 2lambda+mu", criterion_3),
    4: ("Cartan / orbit representative completeness", criterion_4),
    5: ("minor minimum identity", criterion_5),
    6: ("Grassmannian lower bound", criterion_6),
    7: ("coset counts vs tree oracle", criterion_7),
    8: ("algebra sanity", criterion_8),
    9: ("lift independence", criterion_9),
}


def report(k: int, ok: bool, detail: str) -> str:
    return f"CRITERION {k} {'PASS' if ok else 'FAIL'}: {CRITERIA[k][0]} | {detail}"


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, capsys):
    ok, detail = CRITERIA[k][1]()
    with capsys.disabled():
        print("\n" + report(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k][1]()
        results.append(ok)
        print(report(k, ok, detail), flush=True)
    sys.exit(0 if all(results) else 1)
