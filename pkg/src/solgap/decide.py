"""Spectral gap, ergodicity and strong ergodicity verdicts with replayable certificates.

The gap question is reduced to the simple submodules of Q^d under the
transposed matrices: the action lacks a spectral gap exactly when one of them
(one per isomorphism class suffices) carries a virtually abelian image.
Ergodicity fails exactly when one of them carries a finite image; with
rational translations the affine image on the corresponding quotient is then
finite as well, since every translation phase is a rational angle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from . import __version__
from .linalg import EchelonSpan, Matrix, Vector, format_rational, parse_rational, solve
from .modules import (
    ActionOnSubmodule,
    MeataxeFailure,
    NortonCertificate,
    Submodule,
    hom_space,
    is_irreducible,
    restrict,
    simple_submodule_reps,
    spin,
)
from .solenoid import (
    AffineGen,
    SolenoidSpec,
    annihilator_lattice,
    dual_apply,
    in_ring,
    pairing_phase,
    problem_to_json,
)
from .zariski import (
    DEFAULT_ENUMERATION_BOUND,
    GroupClass,
    classify_group,
    congruence_certificate,
    envelope,
    has_infinite_order,
)

MAX_FINITE_ORDER = {1: 2, 2: 12, 3: 48, 4: 1152, 5: 3840, 6: 103680, 7: 2903040, 8: 696729600}


# ---------------------------------------------------------------------------
# verdict types


@dataclass
class GapVerdict:
    tag: str
    reason: str = ""
    witness: ActionOnSubmodule | None = None
    group_class: GroupClass | None = None
    evidence: list[dict] = field(default_factory=list)
    class_count: int = 0

    @property
    def decided(self) -> bool:
        return self.tag != "Undecided"

    def summary(self) -> str:
        if self.tag in ("NoGap", "NotStronglyErgodic") and self.witness is not None:
            W = self.witness.submodule
            space = f"Q^{W.ambient_dim}" if W.dim == W.ambient_dim else _span_text(W)
            return f"{self.tag}, witness W = {space}, class {self.group_class}"
        if self.tag == "Undecided":
            return f"Undecided({self.reason})"
        return self.tag


@dataclass
class ErgodicVerdict:
    tag: str
    reason: str = ""
    witness: dict[str, Any] | None = None
    evidence: list[dict] = field(default_factory=list)
    class_count: int = 0

    def summary(self) -> str:
        if self.tag == "NotErgodic" and self.witness:
            chi = "(" + ", ".join(format_rational(x) for x in self.witness["chi0"]) + ")"
            return (f"NotErgodic, chi0 = {chi}, orbit size {len(self.witness['orbit'])}, "
                    f"affine image order {self.witness['affine_image_order']}")
        if self.tag == "Undecided":
            return f"Undecided({self.reason})"
        return self.tag


def _span_text(W: Submodule) -> str:
    vecs = ["(" + ", ".join(format_rational(x) for x in v) + ")" for v in W.basis]
    return "span{" + ", ".join(vecs) + "}"


# ---------------------------------------------------------------------------
# shared machinery


def _dual_mats(spec: SolenoidSpec, gens: Sequence[AffineGen]) -> list[Matrix]:
    if not gens:
        return [Matrix.identity(spec.d)]
    return [g.matrix.T for g in gens]


@dataclass
class _Analysis:
    reps: list[ActionOnSubmodule]
    classes: list[GroupClass]


def _analyse(spec, gens, seed, bound) -> _Analysis:
    mats = _dual_mats(spec, gens)
    reps = simple_submodule_reps(mats, seed)
    classes = [classify_group(list(r.restricted_gens), bound) for r in reps]
    return _Analysis(reps, classes)


def _infinite_word(mats: Sequence[Matrix], max_length: int = 4) -> tuple[tuple[int, int], ...] | None:
    """A short word (letters: (generator, +-1)) of infinite order, if any."""
    letters = [(i, e) for i in range(len(mats)) for e in (1, -1)]
    for length in range(1, max_length + 1):
        for word in itertools.product(letters, repeat=length):
            if has_infinite_order(evaluate_letters(word, mats)):
                return word
    return None


def evaluate_letters(word, mats: Sequence[Matrix]) -> Matrix:
    n = mats[0].rows
    m = Matrix.identity(n)
    for i, e in word:
        m = m @ (mats[i] if e == 1 else mats[i].inverse())
    return m


def _class_witness(cls: GroupClass) -> dict:
    out: dict[str, Any] = {"tag": cls.tag}
    if cls.order is not None:
        out["order"] = cls.order
    if cls.congruence is not None:
        res = cls.congruence
        out["prime"] = res.prime
        out["image_order"] = res.image_order
        out["kernel_basis"] = [m.to_json() for m in res.kernel_basis]
    return out


def _gap_evidence(rep: ActionOnSubmodule, cls: GroupClass, seed: int) -> dict:
    mats = list(rep.restricted_gens)
    ok, cert = is_irreducible(mats, seed)
    assert ok
    env = envelope(mats)
    X, Y = env.witness
    return {
        "submodule": rep.submodule.to_json(),
        "norton": cert.to_json(),
        "envelope_basis": [m.to_json() for m in env.basis],
        "witness_pair": [X.to_json(), Y.to_json()],
        "class": cls.tag,
    }


# ---------------------------------------------------------------------------
# spectral gap


def decide_spectral_gap(
    spec: SolenoidSpec,
    gens: Sequence[AffineGen],
    enumeration_bound: int = DEFAULT_ENUMERATION_BOUND,
    seed: int = 0,
) -> GapVerdict:
    """Gap / NoGap / Undecided; translations play no role."""
    try:
        analysis = _analyse(spec, gens, seed, enumeration_bound)
    except MeataxeFailure as exc:
        return GapVerdict("Undecided", reason=f"module decomposition failed: {exc}")
    for rep, cls in zip(analysis.reps, analysis.classes):
        if cls.virtually_abelian:
            return GapVerdict("NoGap", witness=rep, group_class=cls, class_count=len(analysis.reps))
    undecided = [cls for cls in analysis.classes if cls.virtually_abelian is None]
    if undecided:
        return GapVerdict("Undecided", reason=undecided[0].reason or "virtual abelianness not established",
                          class_count=len(analysis.reps))
    evidence = [_gap_evidence(r, c, seed) for r, c in zip(analysis.reps, analysis.classes)]
    return GapVerdict("Gap", evidence=evidence, class_count=len(analysis.reps))


def decide_strong_ergodicity(spec, gens, enumeration_bound: int = DEFAULT_ENUMERATION_BOUND, seed: int = 0) -> GapVerdict:
    v = decide_spectral_gap(spec, gens, enumeration_bound, seed)
    relabel = {"Gap": "StronglyErgodic", "NoGap": "NotStronglyErgodic"}
    v.tag = relabel.get(v.tag, v.tag)
    return v


# ---------------------------------------------------------------------------
# ergodicity


def dual_orbit(spec: SolenoidSpec, gens: Sequence[AffineGen], chi: Vector, cap: int | None = None) -> list[Vector] | None:
    """Orbit of chi under the dual action; None if it exceeds ``cap``."""
    return _orbit([g.matrix.T for g in gens], chi, cap)


def _orbit(mats: Sequence[Matrix], chi: Vector, cap: int | None) -> list[Vector] | None:
    seen = {tuple(chi)}
    order = [tuple(chi)]
    i = 0
    while i < len(order):
        for m in mats:
            w = m.apply(order[i])
            if w not in seen:
                if cap is not None and len(seen) >= cap:
                    return None
                seen.add(w)
                order.append(w)
        i += 1
    return order


def _scale_phase(c: Fraction, alpha: Fraction) -> Fraction:
    """c * alpha for c in Z[1/a] and a phase whose denominator is prime to a."""
    m = alpha.denominator
    if m == 1:
        return Fraction(0)
    val = c.numerator * pow(c.denominator, -1, m) * alpha.numerator
    return Fraction(val % m, m)


def affine_image_order(spec: SolenoidSpec, gens: Sequence[AffineGen], lattice: Sequence[Vector], bound: int) -> int | None:
    """Order of the image of the group acting on the characters spanned by ``lattice``.

    An element is recorded as (matrix on lattice coordinates, phase of each
    basis character); the phase extends to all of the lattice because it is a
    character whose values have denominators prime to a.
    """
    if not lattice:
        return 1
    d = spec.d
    B = Matrix.from_columns(lattice, d)
    r = len(lattice)
    gen_data = []
    for g in gens:
        cols = []
        for b in lattice:
            c = solve(B, g.matrix.T.apply(b))
            if c is None:
                raise ValueError("lattice span is not invariant")
            cols.append(c)
        M = Matrix.from_columns(cols, r)
        phi = tuple(pairing_phase(b, g.translation, spec) for b in lattice)
        gen_data.append((M, phi))
    ident = (Matrix.identity(r), (Fraction(0),) * r)
    seen = {ident}
    queue = [ident]
    while queue:
        M_e, phi_e = queue.pop()
        for M_g, phi_g in gen_data:
            # (U_e U_g) xi(chi) = e(phi_e(chi) + phi_g(M_e chi)) xi(M_g M_e chi)
            phi = []
            for j in range(r):
                total = phi_e[j]
                for i in range(r):
                    if M_e[i, j]:
                        total += _scale_phase(M_e[i, j], phi_g[i])
                phi.append(total - (total.numerator // total.denominator))
            elem = (M_g @ M_e, tuple(phi))
            if elem not in seen:
                if len(seen) >= bound:
                    return None
                seen.add(elem)
                queue.append(elem)
    return len(seen)


def decide_ergodicity(
    spec: SolenoidSpec,
    gens: Sequence[AffineGen],
    enumeration_bound: int = DEFAULT_ENUMERATION_BOUND,
    seed: int = 0,
) -> ErgodicVerdict:
    try:
        analysis = _analyse(spec, gens, seed, enumeration_bound)
    except MeataxeFailure as exc:
        return ErgodicVerdict("Undecided", reason=f"module decomposition failed: {exc}")
    n_cls = len(analysis.reps)
    for rep, cls in zip(analysis.reps, analysis.classes):
        if cls.tag != "Finite":
            continue
        W = rep.submodule
        chi0 = annihilator_lattice(W, spec)[0]
        orbit = dual_orbit(spec, gens, chi0)
        span = spin(orbit, [], spec.d)
        Y = annihilator_lattice(span, spec)
        order = affine_image_order(spec, gens, Y, enumeration_bound)
        if order is None:
            return ErgodicVerdict("Undecided", reason="affine image enumeration exceeded the bound", class_count=n_cls)
        phases = [[i, [format_rational(x) for x in chi], format_rational(pairing_phase(chi, g.translation, spec))]
                  for i, g in enumerate(gens) for chi in orbit]
        witness = {
            "submodule": W.to_json(),
            "chi0": chi0,
            "orbit": orbit,
            "annihilator_lattice": Y,
            "phases": phases,
            "affine_image_order": order,
            "group_order": cls.order,
        }
        return ErgodicVerdict("NotErgodic", witness=witness, class_count=n_cls)
    evidence = []
    for rep, cls in zip(analysis.reps, analysis.classes):
        word = _infinite_word(list(rep.restricted_gens))
        if word is None:
            return ErgodicVerdict("Undecided", reason="no infinite-order word found for a representative", class_count=n_cls)
        evidence.append({"submodule": rep.submodule.to_json(), "word": [list(l) for l in word]})
    return ErgodicVerdict("Ergodic", evidence=evidence, class_count=n_cls)


# ---------------------------------------------------------------------------
# brute-force oracle


def finite_orbit_search(
    spec: SolenoidSpec,
    gens: Sequence[AffineGen],
    height_bound: int,
    power_bound: int = 0,
    cap: int | None = None,
) -> list[tuple[Vector, list[Vector]]]:
    """All dual orbits of characters v / a^k (|v_i| <= height_bound, k <= power_bound) that are finite.

    Orbits are reported once, keyed by their first character in enumeration
    order.  A finite orbit has at most as many elements as the largest finite
    subgroup of GL_d(Q), which bounds the search.
    """
    d = spec.d
    if cap is None:
        cap = MAX_FINITE_ORDER.get(d, 10 ** 6)
    if spec.a == 1:
        power_bound = 0
    H = height_bound
    cands = {}
    for k in range(power_bound + 1):
        den = spec.a ** k
        for v in itertools.product(range(-H, H + 1), repeat=d):
            if any(v):
                chi = tuple(Fraction(x, den) for x in v)
                key = (k, max(abs(x) for x in v), tuple(-x for x in v))
                if chi not in cands or key < cands[chi]:
                    cands[chi] = key
    ordered = sorted(cands, key=cands.__getitem__)
    mats = [g.matrix.T for g in gens]
    covered: set[Vector] = set()
    out = []
    for chi in ordered:
        if chi in covered:
            continue
        orbit = _orbit(mats, chi, cap)
        if orbit is None:
            continue
        covered.update(orbit)
        out.append((chi, sorted(orbit, key=lambda w: (max(abs(x) for x in w), tuple(-x for x in w)))))
    return out


# ---------------------------------------------------------------------------
# certificates


def _vec_json(v: Sequence[Fraction]) -> list[str]:
    return [format_rational(x) for x in v]


def _vec_parse(v: Sequence[str]) -> Vector:
    return tuple(parse_rational(str(x)) for x in v)


def gap_certificate(spec, gens, verdict: GapVerdict, kind: str = "gap", seed: int = 0) -> dict:
    doc: dict[str, Any] = {
        "kind": kind,
        "verdict": verdict.tag,
        "tool_version": __version__,
        "problem": problem_to_json(spec, gens),
        "replay_data": {"seed": seed, "class_count": verdict.class_count},
    }
    if verdict.tag in ("NoGap", "NotStronglyErgodic"):
        doc["witness"] = {
            "submodule": verdict.witness.submodule.to_json(),
            "restricted": [m.to_json() for m in verdict.witness.restricted_gens],
            "class": _class_witness(verdict.group_class),
        }
    elif verdict.tag in ("Gap", "StronglyErgodic"):
        doc["evidence"] = {"representatives": verdict.evidence}
    else:
        doc["reason"] = verdict.reason
    return doc


def ergodic_certificate(spec, gens, verdict: ErgodicVerdict, seed: int = 0) -> dict:
    doc: dict[str, Any] = {
        "kind": "ergodic",
        "verdict": verdict.tag,
        "tool_version": __version__,
        "problem": problem_to_json(spec, gens),
        "replay_data": {"seed": seed, "class_count": verdict.class_count},
    }
    if verdict.tag == "NotErgodic":
        w = verdict.witness
        doc["witness"] = {
            "submodule": w["submodule"],
            "chi0": _vec_json(w["chi0"]),
            "orbit": [_vec_json(c) for c in w["orbit"]],
            "annihilator_lattice": [_vec_json(c) for c in w["annihilator_lattice"]],
            "phases": w["phases"],
            "affine_image_order": w["affine_image_order"],
        }
    elif verdict.tag == "Ergodic":
        doc["evidence"] = {"representatives": verdict.evidence}
    else:
        doc["reason"] = verdict.reason
    return doc


def certify(spec, gens, enumeration_bound: int = DEFAULT_ENUMERATION_BOUND, seed: int = 0) -> dict:
    gap = decide_spectral_gap(spec, gens, enumeration_bound, seed)
    erg = decide_ergodicity(spec, gens, enumeration_bound, seed)
    strong = decide_strong_ergodicity(spec, gens, enumeration_bound, seed)
    return {
        "tool_version": __version__,
        "problem": problem_to_json(spec, gens),
        "certificates": [
            gap_certificate(spec, gens, gap, "gap", seed),
            ergodic_certificate(spec, gens, erg, seed),
            gap_certificate(spec, gens, strong, "strong", seed),
        ],
    }


def verify_certificate(spec: SolenoidSpec, gens: Sequence[AffineGen], doc: Any) -> bool:
    """Replay a certificate (or a bundle of them); False on any mismatch, never raises."""
    try:
        if isinstance(doc, dict) and "certificates" in doc:
            certs = doc["certificates"]
            return bool(certs) and all(verify_certificate(spec, gens, c) for c in certs)
        return _verify_one(spec, list(gens), doc)
    except Exception:
        return False


_KIND_TAGS = {
    "gap": ("Gap", "NoGap"),
    "strong": ("StronglyErgodic", "NotStronglyErgodic"),
    "ergodic": ("Ergodic", "NotErgodic"),
}


def _verify_one(spec: SolenoidSpec, gens: list[AffineGen], doc: dict) -> bool:
    kind = doc["kind"]
    positive, negative = _KIND_TAGS[kind]
    tag = doc["verdict"]
    if doc.get("problem") is not None and doc["problem"] != problem_to_json(spec, gens):
        return False
    if tag == "Undecided":
        return isinstance(doc.get("reason"), str)
    mats = _dual_mats(spec, gens)
    seed = int(doc["replay_data"]["seed"])
    if kind in ("gap", "strong"):
        if tag == negative:
            return _verify_no_gap(mats, doc["witness"])
        if tag == positive:
            return _verify_gap(mats, doc["evidence"], doc["replay_data"], seed)
        return False
    if tag == negative:
        return _verify_not_ergodic(spec, gens, doc["witness"])
    if tag == positive:
        return _verify_ergodic(mats, doc["evidence"], doc["replay_data"], seed)
    return False


def _restrict_checked(mats, sub_json) -> ActionOnSubmodule | None:
    W = Submodule.from_json(sub_json)
    if W.dim == 0 or W.ambient_dim != mats[0].rows:
        return None
    return restrict(mats, W)


def _verify_no_gap(mats, witness) -> bool:
    action = _restrict_checked(mats, witness["submodule"])
    if action is None:
        return False
    R = list(action.restricted_gens)
    if [m.to_json() for m in R] != witness["restricted"]:
        return False
    cls = witness["class"]
    res = congruence_certificate(R, int(cls["prime"]), int(cls["image_order"]) + 1)
    if res.image_order != cls["image_order"]:
        return False
    stored = [Matrix.from_json(m) for m in cls["kernel_basis"]]
    n = R[0].rows
    span = EchelonSpan(n * n, [m.flat() for m in res.kernel_basis])
    stored_span = EchelonSpan(n * n, [m.flat() for m in stored])
    if len(span) != len(stored_span) or not all(span.contains(m.flat()) for m in stored):
        return False
    if any(not x.commutator(y).is_zero() for x, y in itertools.combinations(stored, 2)):
        return False
    if cls["tag"] == "Finite":
        return res.trivial is True and not stored and cls.get("order") == res.image_order
    if cls["tag"] == "VirtuallyAbelian":
        return res.abelian is True
    return False


def _covers_all_classes(mats, subs: list[Submodule], expected: int, seed: int) -> bool:
    """The stored representatives are pairwise non-isomorphic and as many as the socle classes."""
    if len(subs) != expected:
        return False
    actions = [list(restrict(mats, W).restricted_gens) for W in subs]
    for x, y in itertools.combinations(actions, 2):
        if x[0].rows == y[0].rows and hom_space(x, y):
            return False
    return len(simple_submodule_reps(mats, seed)) == expected


def _verify_gap(mats, evidence, replay, seed) -> bool:
    reps = evidence["representatives"]
    subs = []
    for rep in reps:
        action = _restrict_checked(mats, rep["submodule"])
        if action is None:
            return False
        R = list(action.restricted_gens)
        if not NortonCertificate.from_json(rep["norton"]).check(R):
            return False
        n = R[0].rows
        stored = [Matrix.from_json(m) for m in rep["envelope_basis"]]
        env = envelope(R)
        span = EchelonSpan(n * n, [m.flat() for m in env.basis])
        if len(stored) != len(span) or not all(span.contains(m.flat()) for m in stored):
            return False
        if len(EchelonSpan(n * n, [m.flat() for m in stored])) != len(span):
            return False
        X, Y = (Matrix.from_json(m) for m in rep["witness_pair"])
        if not (span.contains(X.flat()) and span.contains(Y.flat())) or X.commutator(Y).is_zero():
            return False
        subs.append(action.submodule)
    return _covers_all_classes(mats, subs, int(replay["class_count"]), seed)


def _verify_ergodic(mats, evidence, replay, seed) -> bool:
    subs = []
    for rep in evidence["representatives"]:
        action = _restrict_checked(mats, rep["submodule"])
        if action is None:
            return False
        R = list(action.restricted_gens)
        ok, _ = is_irreducible(R, seed)
        if not ok:
            return False
        word = [(int(i), int(e)) for i, e in rep["word"]]
        if not word or not has_infinite_order(evaluate_letters(word, R)):
            return False
        subs.append(action.submodule)
    return _covers_all_classes(mats, subs, int(replay["class_count"]), seed)


def _verify_not_ergodic(spec, gens, witness) -> bool:
    chi0 = _vec_parse(witness["chi0"])
    orbit = [_vec_parse(c) for c in witness["orbit"]]
    if not any(chi0) or chi0 not in orbit or len(set(orbit)) != len(orbit):
        return False
    if any(len(c) != spec.d or not all(in_ring(x, spec) for x in c) for c in orbit):
        return False
    members = set(orbit)
    for g in gens:
        if any(dual_apply(g, c) not in members for c in orbit):
            return False
    W = Submodule.from_json(witness["submodule"])
    if W.ambient_dim != spec.d or not all(W.contains(c) for c in orbit):
        return False
    lattice = [_vec_parse(c) for c in witness["annihilator_lattice"]]
    if lattice != annihilator_lattice(spin(orbit, [], spec.d), spec):
        return False
    expected = [[i, _vec_json(c), format_rational(pairing_phase(c, g.translation, spec))]
                for i, g in enumerate(gens) for c in orbit]
    if witness["phases"] != expected:
        return False
    for _, _, angle in witness["phases"]:
        q = parse_rational(angle)
        if not 0 <= q < 1:
            return False
    order = affine_image_order(spec, gens, lattice, int(witness["affine_image_order"]) + 1)
    return order == witness["affine_image_order"]
