"""Filtered algebra / doubling-filtered module bookkeeping and freeness certificates.

A truncated model stores the action table (lam, mu) -> a_lam . m_mu for
every pair whose top 2 lam + mu lies in a dominance-downward-closed index
set.  Freeness over the graded algebra is a covering statement about
2 lam + l; lifting it to the filtered module is a triangular elimination
which the certificate records and which is re-checked against the ungraded
table with exact rational arithmetic.
"""

from __future__ import annotations

import hashlib
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import weights as W
from .field import FieldConfig
from .hecke import HeckeContext, ModuleElement, DEFAULT_BUDGET


class EliminationStall(RuntimeError):
    """A lower term needed by the elimination lies outside the index set."""

    def __init__(self, nu, missing, suggested_radius: int):
        super().__init__(
            f"elimination of {W.format_weight(W.from_chamber(nu))} needs "
            f"{W.format_weight(W.from_chamber(missing))} outside the box; try radius {suggested_radius}"
        )
        self.nu = tuple(nu)
        self.missing = tuple(missing)
        self.suggested_radius = suggested_radius


def top_of(lam, mu) -> tuple:
    return W.add(W.phi_chamber(lam), mu)


@dataclass
class TruncatedModuleModel:
    n: int
    index: list
    table: dict  # (lam, mu) -> ModuleElement
    radius: int | None = None
    q: int | None = None
    graded: bool = False

    def __post_init__(self):
        self.index = sorted({tuple(d) for d in self.index}, key=W.elimination_key)

    def grading(self, d) -> tuple:
        return tuple(d)

    @staticmethod
    def phi(d) -> tuple:
        return W.phi_chamber(d)

    def pairs(self) -> list:
        return sorted(self.table, key=lambda p: (W.elimination_key(top_of(*p)), p))

    def copy(self, table=None, graded=None) -> "TruncatedModuleModel":
        return TruncatedModuleModel(
            self.n,
            list(self.index),
            dict(self.table if table is None else table),
            self.radius,
            self.q,
            self.graded if graded is None else graded,
        )


def index_set(n: int, radius: int) -> list:
    """Downward closure of the radius box (equal to the box for n = 2 and for radius <= 1)."""
    return W.downward_closure(W.dominant_box(n, radius))


def build_model(
    config: FieldConfig, radius: int, budget: int = DEFAULT_BUDGET, workers: int = 1
) -> TruncatedModuleModel:
    """Action table from the Hecke counts for every (lam, mu) with 2 lam + mu in the index set."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    n = config.n
    index = index_set(n, radius)
    members = set(index)
    pairs = [(la, mu) for la in index for mu in index if top_of(la, mu) in members]
    ctx = HeckeContext(config, budget)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            values = list(ex.map(lambda p: ctx.act_basis(*p), pairs))
    else:
        values = [ctx.act_basis(*p) for p in pairs]
    return TruncatedModuleModel(n, index, dict(zip(pairs, values)), radius, config.q)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompatibilityReport:
    ok: bool
    violation: tuple | None = None  # (lam, mu, nu)
    reason: str | None = None


def check_filtration_compatibility(model: TruncatedModuleModel) -> CompatibilityReport:
    """Every a_lam . m_mu supported on nu <= 2 lam + mu, inside the index set."""
    members = set(model.index)
    for lam, mu in model.pairs():
        top = top_of(lam, mu)
        for nu in model.table[(lam, mu)].support():
            if not W.chamber_leq(nu, top):
                return CompatibilityReport(False, (lam, mu, nu), "not below 2*lambda+mu")
            if nu not in members:
                return CompatibilityReport(False, (lam, mu, nu), "outside the index set")
    return CompatibilityReport(True)


def graded_leading_model(model: TruncatedModuleModel) -> TruncatedModuleModel:
    """Keep only the coefficient at exactly 2 lam + mu: the associated graded action."""
    table = {}
    for (lam, mu), value in model.table.items():
        top = top_of(lam, mu)
        table[(lam, mu)] = ModuleElement(model.n, {top: value.coefficient(top)})
    return model.copy(table=table, graded=True)


@dataclass(frozen=True)
class GradedReport:
    ok: bool
    uncovered: tuple | None = None
    doubly_covered: tuple | None = None
    zero_leading: tuple | None = None  # (lam, ell)

    @property
    def witness(self):
        return self.uncovered or self.doubly_covered or self.zero_leading


def _preimages(nu, basis) -> list:
    out = []
    for ell in basis:
        diff = [a - b for a, b in zip(nu, ell)]
        if all(x >= 0 and x % 2 == 0 for x in diff):
            out.append((tuple(x // 2 for x in diff), tuple(ell)))
    return out


def certify_graded_freeness(model: TruncatedModuleModel, basis: Sequence) -> GradedReport:
    """(l in basis, lam) -> 2 lam + l hits every index element once, with nonzero leading coefficient."""
    basis = [tuple(b) for b in basis]
    for nu in model.index:
        pre = _preimages(nu, basis)
        if not pre:
            return GradedReport(False, uncovered=nu)
        if len(pre) > 1:
            return GradedReport(False, doubly_covered=nu)
        lam, ell = pre[0]
        value = model.table.get((lam, ell))
        if value is None or not value.coefficient(nu):
            return GradedReport(False, zero_leading=(lam, ell))
    return GradedReport(True)


# ---------------------------------------------------------------------------


@dataclass
class CertificateEntry:
    nu: tuple
    lam: tuple
    ell: tuple
    leading: Fraction
    expression: dict  # (lam', ell') -> Fraction; m_nu = sum c a_lam' . m_ell'

    def to_json(self) -> dict:
        wj = lambda d: W.weight_to_json(W.from_chamber(d))
        return {
            "nu": wj(self.nu),
            "lambda": wj(self.lam),
            "ell": wj(self.ell),
            "leading": _frac(self.leading),
            "expression": [
                {"lambda": wj(la), "ell": wj(el), "coeff": _frac(c)}
                for (la, el), c in sorted(self.expression.items(), key=lambda kv: (W.elimination_key(top_of(*kv[0])), kv[0]))
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "CertificateEntry":
        ch = lambda w: W.chamber_coords(W.parse_weight(w))
        expr = {}
        for t in obj["expression"]:
            key = (ch(t["lambda"]), ch(t["ell"]))
            expr[key] = expr.get(key, Fraction(0)) + Fraction(t["coeff"])
        return cls(ch(obj["nu"]), ch(obj["lambda"]), ch(obj["ell"]), Fraction(obj["leading"]), expr)


def _frac(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


@dataclass
class FreenessCertificate:
    n: int
    q: int | None
    radius: int | None
    basis: list
    entries: list  # CertificateEntry in elimination order
    digest: str = field(default="")

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def order(self) -> list:
        return [e.nu for e in self.entries]

    def payload(self) -> dict:
        return {
            "n": self.n,
            "q": self.q,
            "radius": self.radius,
            "basis": [W.weight_to_json(W.from_chamber(b)) for b in self.basis],
            "rank": self.rank,
            "order": "increasing chamber-coordinate sum, then lexicographic",
            "entries": [e.to_json() for e in self.entries],
        }

    def compute_digest(self) -> str:
        blob = json.dumps(self.payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_json(self) -> dict:
        out = self.payload()
        out["digest"] = self.digest or self.compute_digest()
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, obj) -> "FreenessCertificate":
        basis = [W.chamber_coords(W.parse_weight(b)) for b in obj["basis"]]
        entries = [CertificateEntry.from_json(e) for e in obj["entries"]]
        return cls(obj["n"], obj.get("q"), obj.get("radius"), basis, entries, obj.get("digest", ""))


def lift_freeness(model: TruncatedModuleModel, basis: Sequence) -> FreenessCertificate:
    """Triangular elimination m_nu = q^{-1} (a_lam . m_l - lower), lowest nu first."""
    basis = sorted((tuple(b) for b in basis), key=W.elimination_key)
    graded = certify_graded_freeness(model, basis)
    if not graded.ok:
        raise ValueError(f"graded freeness fails: {graded}")
    members = set(model.index)
    expr: dict = {}
    entries = []
    for nu in model.index:
        (lam, ell), = _preimages(nu, basis)
        value = model.table[(lam, ell)]
        lead = value.coefficient(nu)
        acc = {(lam, ell): Fraction(1)}
        for lower, c in value.items():
            if lower == nu:
                continue
            if lower not in members:
                raise EliminationStall(nu, lower, max(max(lower), (model.radius or 0) + 1))
            if lower not in expr:
                # only possible if the table is not triangular
                raise ValueError(f"table entry {(lam, ell)} has {lower} not below {nu}")
            for key, x in expr[lower].items():
                acc[key] = acc.get(key, Fraction(0)) - c * x
        expr[nu] = {k: v / lead for k, v in acc.items() if v}
        entries.append(CertificateEntry(nu, lam, ell, lead, expr[nu]))
    cert = FreenessCertificate(model.n, model.q, model.radius, basis, entries)
    cert.digest = cert.compute_digest()
    return cert


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    first_bad: tuple | None = None
    reason: str | None = None


def _expand(entry: CertificateEntry, model: TruncatedModuleModel) -> ModuleElement | None:
    out = ModuleElement(model.n)
    for key, c in entry.expression.items():
        value = model.table.get(key)
        if value is None:
            return None
        out = out + value.scale(c)
    return out


def verify_certificate(cert: FreenessCertificate, model: TruncatedModuleModel, workers: int = 1) -> VerificationReport:
    """Re-check every expression against the (ungraded) table of `model`."""
    if cert.digest and cert.digest != cert.compute_digest():
        return VerificationReport(False, None, "digest mismatch")
    if cert.n != model.n:
        return VerificationReport(False, None, "dimension mismatch")
    order = cert.order
    if sorted(order, key=W.elimination_key) != order or len(set(order)) != len(order):
        return VerificationReport(False, None, "elimination order is not increasing")
    if set(order) != set(model.index):
        missing = sorted(set(model.index) ^ set(order), key=W.elimination_key)
        return VerificationReport(False, missing[0], "certificate does not cover the index set")
    basis = [tuple(b) for b in cert.basis]
    for e in cert.entries:
        if _preimages(e.nu, basis) != [(e.lam, e.ell)]:
            return VerificationReport(False, e.nu, "pairing is not a bijection")
        if not e.leading or model.table.get((e.lam, e.ell), ModuleElement(model.n)).coefficient(e.nu) != e.leading:
            return VerificationReport(False, e.nu, "leading coefficient mismatch")
        if any(not W.chamber_leq(top_of(*k), e.nu) for k in e.expression):
            return VerificationReport(False, e.nu, "expression is not triangular")

    def check(e):
        return _expand(e, model) == ModuleElement.from_chamber(e.nu)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(check, cert.entries))
    else:
        results = [check(e) for e in cert.entries]
    for e, good in zip(cert.entries, results):
        if not good:
            return VerificationReport(False, e.nu, "expansion does not reproduce m_nu")
    return VerificationReport(True)


def perturb_lower(model: TruncatedModuleModel, rng: random.Random, terms: int = 3, max_coeff: int = 5) -> TruncatedModuleModel:
    """Add random multiples of strictly dominance-lower basis vectors to random table entries."""
    table = dict(model.table)
    pairs = model.pairs()
    for _ in range(terms):
        lam, mu = rng.choice(pairs)
        top = top_of(lam, mu)
        below = [d for d in model.index if W.chamber_lt(d, top)]
        if not below:
            continue
        d = rng.choice(below)
        c = Fraction(rng.choice([x for x in range(-max_coeff, max_coeff + 1) if x]), rng.randint(1, 3))
        table[(lam, mu)] = table[(lam, mu)] + ModuleElement(model.n, {d: c})
    return model.copy(table=table)
