from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest

from hermhecke import weights as W
from hermhecke.field import FieldConfig
from hermhecke.filtered import (
    EliminationStall,
    FreenessCertificate,
    TruncatedModuleModel,
    build_model,
    certify_graded_freeness,
    check_filtration_compatibility,
    graded_leading_model,
    index_set,
    lift_freeness,
    perturb_lower,
    top_of,
    verify_certificate,
)
from hermhecke.hecke import ModuleElement


@pytest.fixture(scope="module")
def model2():
    return build_model(FieldConfig(q=3, n=2), 3)


@pytest.fixture(scope="module")
def model3():
    return build_model(FieldConfig(q=3, n=3), 2)


def test_model_shape(model2):
    assert model2.index == [(0,), (1,), (2,), (3,)]
    assert set(model2.table) == {((0,), (0,)), ((0,), (1,)), ((0,), (2,)), ((0,), (3,)), ((1,), (0,)), ((1,), (1,))}
    assert model2.table[((1,), (0,))] == ModuleElement(2, {(2,): 1, (0,): 4})


def test_compatibility_pass_and_fault_injection(model2):
    assert check_filtration_compatibility(model2).ok
    bad = dict(model2.table)
    bad[((1,), (0,))] = bad[((1,), (0,))] + ModuleElement(2, {(3,): 1})
    rep = check_filtration_compatibility(model2.copy(table=bad))
    assert not rep.ok and rep.violation == ((1,), (0,), (3,))
    empty = TruncatedModuleModel(2, [], {})
    assert check_filtration_compatibility(empty).ok


def test_graded_model(model2):
    g = graded_leading_model(model2)
    assert g.graded
    assert g.table[((1,), (0,))] == ModuleElement(2, {(2,): 1})
    gg = graded_leading_model(g)
    assert gg.table == g.table


def test_graded_action_preserves_parity(model3):
    g = graded_leading_model(model3)
    for (lam, mu), value in g.table.items():
        for nu in value.support():
            assert tuple(x % 2 for x in nu) == tuple(x % 2 for x in mu)
            assert nu == top_of(lam, mu)


def test_certify_graded_freeness_witnesses(model2):
    g = graded_leading_model(model2)
    L = W.residue_classes(2)
    assert certify_graded_freeness(g, L).ok
    missing = certify_graded_freeness(g, [(0,)])
    assert not missing.ok and missing.uncovered == (1,)
    dup = certify_graded_freeness(g, L + [(1,)])
    assert not dup.ok and dup.doubly_covered == (1,)
    zeroed = dict(g.table)
    zeroed[((1,), (0,))] = ModuleElement(2)
    z = certify_graded_freeness(g.copy(table=zeroed), L)
    assert not z.ok and z.zero_leading == ((1,), (0,))


@pytest.mark.parametrize("fixture,n,rank,size", [("model2", 2, 2, 4), ("model3", 3, 4, 11)])
def test_lift_and_verify(request, fixture, n, rank, size):
    model = request.getfixturevalue(fixture)
    cert = lift_freeness(model, W.residue_classes(n))
    assert cert.rank == rank and len(cert.entries) == size
    assert verify_certificate(cert, model).ok
    assert verify_certificate(cert, model, workers=3).ok
    # JSON round trip preserves the digest
    again = FreenessCertificate.from_json(json.loads(cert.dumps()))
    assert again.compute_digest() == cert.digest
    assert verify_certificate(again, model).ok


def test_tampering_is_detected(model3):
    cert = lift_freeness(model3, W.residue_classes(3))
    obj = json.loads(cert.dumps())
    # change one coefficient and fix up the digest: expansion must fail
    target = next(e for e in obj["entries"] if len(e["expression"]) > 1)
    target["expression"][0]["coeff"] = str(Fraction(target["expression"][0]["coeff"]) + 1)
    forged = FreenessCertificate.from_json(obj)
    forged.digest = forged.compute_digest()
    rep = verify_certificate(forged, model3)
    assert not rep.ok and rep.reason == "expansion does not reproduce m_nu"
    assert rep.first_bad == W.chamber_coords(W.parse_weight(target["nu"]))
    # without fixing the digest the mismatch is caught first
    stale = FreenessCertificate.from_json(obj)
    assert verify_certificate(stale, model3).reason == "digest mismatch"


def test_verify_catches_structural_errors(model2):
    cert = lift_freeness(model2, W.residue_classes(2))
    short = FreenessCertificate(cert.n, cert.q, cert.radius, cert.basis, cert.entries[:-1])
    assert verify_certificate(short, model2).first_bad == (3,)
    swapped = FreenessCertificate(cert.n, cert.q, cert.radius, cert.basis, cert.entries[::-1])
    assert verify_certificate(swapped, model2).reason == "elimination order is not increasing"


def test_lift_independence(model2, model3):
    rng = random.Random(7)
    for model, n in ((model2, 2), (model3, 3)):
        base = lift_freeness(model, W.residue_classes(n))
        for _ in range(5):
            p = perturb_lower(model, rng)
            assert check_filtration_compatibility(p).ok
            cert = lift_freeness(p, W.residue_classes(n))
            assert cert.basis == base.basis
            assert verify_certificate(cert, p).ok


def test_elimination_stall_names_boundary():
    # an index set that is not downward closed: (2,) needs (0,), which is missing
    model = TruncatedModuleModel(2, [(2,), (3,)], {}, radius=3)
    model.table[((1,), (0,))] = ModuleElement(2, {(2,): 1, (0,): 4})
    model.table[((1,), (1,))] = ModuleElement(2, {(3,): 1, (1,): 1})
    with pytest.raises(EliminationStall) as exc:
        lift_freeness(model, W.residue_classes(2))
    assert exc.value.nu == (2,) and exc.value.missing == (0,)
    assert exc.value.suggested_radius == 4


def test_index_set():
    assert sorted(index_set(3, 1)) == sorted(W.dominant_box(3, 1))
    assert len(index_set(3, 2)) == 11
    with pytest.raises(ValueError):
        build_model(FieldConfig(), -1)
