"""Canonical JSON for every artifact type.

Rationals serialize as "num/den" strings and big integers as decimal
strings, so files are bit-exact and diff-stable: the same object always
produces the same bytes (sorted keys, fixed separators, trailing
newline).
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .enclosure import Enclosure
from .intervals import AdicInterval, PlainInterval
from .measures import (
    DoublingReport,
    MeasureTree,
    SiblingReport,
    StageRecord,
    WeightParams,
)
from .numtheory import CongruencePair, FarNumberResult, OrderProfile
from .selection import SelectionCertificate, SelectionFamily, SelectionTarget
from .torus import BaseWitness, DependenceRelation, OrbitPoint, XCertificate


def frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_frac(text: str) -> Fraction:
    return Fraction(text)


def interval_json(iv: AdicInterval) -> dict:
    return {"base": iv.base, "level": iv.level, "index": str(iv.index)}


def parse_interval(obj: dict) -> AdicInterval:
    return AdicInterval(int(obj["base"]), int(obj["level"]), int(obj["index"]))


def plain_json(iv: PlainInterval) -> dict:
    return {"left": frac_str(iv.left), "right": frac_str(iv.right)}


def parse_plain(obj: dict) -> PlainInterval:
    return PlainInterval(parse_frac(obj["left"]), parse_frac(obj["right"]))


def enclosure_json(enc: Enclosure) -> dict:
    return {"lo": frac_str(enc.lo), "hi": frac_str(enc.hi)}


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, OrderProfile):
        return {
            "kind": "order-profile",
            "u": str(obj.u),
            "v": str(obj.v),
            "m_uv": str(obj.m_uv),
            "n0": str(obj.n0),
            "c_uv": str(obj.c_uv),
            "order_deficit": str(obj.order_deficit),
            "stabilization_level": str(obj.stabilization_level),
            "probe_depth": str(obj.probe_depth),
        }
    if isinstance(obj, CongruencePair):
        return {
            "kind": "congruence-pair",
            "m2": str(obj.m2),
            "j": str(obj.j),
            "m1": str(obj.m1),
            "k": str(obj.k),
        }
    if isinstance(obj, FarNumberResult):
        return {
            "kind": "far-number",
            "value": frac_str(obj.value),
            "witness_m": obj.witness_m,
            "witness_k": str(obj.witness_k),
            "max_level": obj.max_level,
            "is_adic": obj.is_adic,
        }
    if isinstance(obj, SelectionTarget):
        return {
            "multiplier": obj.multiplier,
            "interval": interval_json(obj.interval),
            "zeta": frac_str(obj.zeta),
            "gap": frac_str(obj.gap),
        }
    if isinstance(obj, SelectionCertificate):
        out = {
            "kind": "selection-certificate",
            "certificate_kind": obj.kind,
            "u": obj.u,
            "v": obj.v,
            "epsilon": frac_str(obj.epsilon),
            "interval": interval_json(obj.interval),
            "targets": [to_jsonable(t) for t in obj.targets],
            "k": str(obj.k),
            "t1": str(obj.t1),
            "t2": str(obj.t2),
            "j": str(obj.j),
        }
        if obj.kind == "two-base":
            out["power_m"] = obj.power_m
            out["power_n"] = obj.power_n
            out["power_s"] = obj.power_s
        return out
    if isinstance(obj, SelectionFamily):
        return {
            "kind": "selection-family",
            "spacing_rule": obj.spacing_rule,
            "entries": [
                {"alpha": alpha, "certificate": to_jsonable(cert)}
                for alpha, cert in obj.entries
            ],
        }
    if isinstance(obj, BaseWitness):
        return {
            "base": obj.base,
            "exponent": str(obj.exponent),
            "sign": obj.sign,
            "lhs": str(obj.lhs),
            "rhs": str(obj.rhs),
            "power_of_two": obj.power_of_two,
        }
    if isinstance(obj, XCertificate):
        return {
            "kind": "x-certificate",
            "x": str(obj.x),
            "epsilon": frac_str(obj.epsilon),
            "witnesses": [to_jsonable(w) for w in obj.witnesses],
        }
    if isinstance(obj, OrbitPoint):
        return {
            "kind": "orbit-point",
            "x": str(obj.x),
            "bases": list(obj.bases),
            "coordinates": [enclosure_json(c) for c in obj.coordinates],
        }
    if isinstance(obj, DependenceRelation):
        return {
            "kind": "dependence-relation",
            "coefficients": list(obj.coefficients),
            "constant": obj.constant,
            "identity": list(obj.identity),
        }
    if isinstance(obj, MeasureTree):
        return {
            "kind": "measure-tree",
            "grid_base": obj.grid_base,
            "params": {
                "q": obj.params.q,
                "a": frac_str(obj.params.a),
                "b": frac_str(obj.params.b),
            },
            "domain": plain_json(obj.domain) if obj.domain else None,
            "factors": [
                {"level": lvl, "index": str(idx), "factor": frac_str(f)}
                for (lvl, idx), f in sorted(obj.factors.items())
            ],
            "entries": [to_jsonable(e) for e in obj.entries],
        }
    if isinstance(obj, StageRecord):
        return {
            "alpha": obj.alpha,
            "anchor": interval_json(obj.anchor),
            "h_trace": [interval_json(i) for i in obj.h_trace],
            "g_trace": [interval_json(i) for i in obj.g_trace],
            "companions": [
                {"base": b, "interval": interval_json(iv)} for b, iv in obj.companions
            ],
            "x": None if obj.x is None else str(obj.x),
            "style": obj.style,
        }
    if isinstance(obj, DoublingReport):
        return {
            "kind": "doubling-report",
            "scale_levels": list(obj.scale_levels),
            "worst_ratio": frac_str(obj.worst_ratio),
            "worst_witness": (
                None
                if obj.worst_witness is None
                else [plain_json(obj.worst_witness[0]), plain_json(obj.worst_witness[1])]
            ),
            "per_stage": [
                {
                    "alpha": s.alpha,
                    "ratio": frac_str(s.ratio),
                    "witness": (
                        None
                        if s.witness is None
                        else [plain_json(s.witness[0]), plain_json(s.witness[1])]
                    ),
                }
                for s in obj.per_stage
            ],
            "siblings": [to_jsonable(s) for s in obj.siblings],
        }
    if isinstance(obj, SiblingReport):
        return {
            "base": obj.base,
            "min_ratio": frac_str(obj.min_ratio),
            "max_ratio": frac_str(obj.max_ratio),
            "min_witness": (
                None
                if obj.min_witness is None
                else [interval_json(obj.min_witness[0]), interval_json(obj.min_witness[1])]
            ),
            "max_witness": (
                None
                if obj.max_witness is None
                else [interval_json(obj.max_witness[0]), interval_json(obj.max_witness[1])]
            ),
            "per_stage": [
                {"alpha": alpha, "ratio": frac_str(r)} for alpha, r in obj.per_stage
            ],
        }
    raise TypeError(f"no JSON form for {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def parse_order_profile(obj: dict) -> OrderProfile:
    return OrderProfile(
        u=int(obj["u"]),
        v=int(obj["v"]),
        m_uv=int(obj["m_uv"]),
        n0=int(obj["n0"]),
        c_uv=int(obj["c_uv"]),
        order_deficit=int(obj["order_deficit"]),
        stabilization_level=int(obj["stabilization_level"]),
        probe_depth=int(obj["probe_depth"]),
    )


def parse_congruence_pair(obj: dict) -> CongruencePair:
    return CongruencePair(
        m2=int(obj["m2"]), j=int(obj["j"]), m1=int(obj["m1"]), k=int(obj["k"])
    )


def parse_selection_certificate(obj: dict) -> SelectionCertificate:
    return SelectionCertificate(
        kind=obj["certificate_kind"],
        u=int(obj["u"]),
        v=int(obj["v"]),
        epsilon=parse_frac(obj["epsilon"]),
        interval=parse_interval(obj["interval"]),
        targets=tuple(
            SelectionTarget(
                multiplier=int(t["multiplier"]),
                interval=parse_interval(t["interval"]),
                zeta=parse_frac(t["zeta"]),
                gap=parse_frac(t["gap"]),
            )
            for t in obj["targets"]
        ),
        k=int(obj["k"]),
        t1=int(obj["t1"]),
        t2=int(obj["t2"]),
        j=int(obj["j"]),
        power_m=obj.get("power_m"),
        power_n=obj.get("power_n"),
        power_s=obj.get("power_s"),
    )


def parse_selection_family(obj: dict) -> SelectionFamily:
    return SelectionFamily(
        entries=tuple(
            (int(entry["alpha"]), parse_selection_certificate(entry["certificate"]))
            for entry in obj["entries"]
        ),
        spacing_rule=obj["spacing_rule"],
    )


def parse_x_certificate(obj: dict) -> XCertificate:
    return XCertificate(
        x=int(obj["x"]),
        epsilon=parse_frac(obj["epsilon"]),
        witnesses=tuple(
            BaseWitness(
                base=int(w["base"]),
                exponent=int(w["exponent"]),
                sign=int(w["sign"]),
                lhs=int(w["lhs"]),
                rhs=int(w["rhs"]),
                power_of_two=bool(w["power_of_two"]),
            )
            for w in obj["witnesses"]
        ),
    )


def parse_measure_tree(obj: dict) -> MeasureTree:
    params = WeightParams(
        q=int(obj["params"]["q"]),
        a=parse_frac(obj["params"]["a"]),
        b=parse_frac(obj["params"]["b"]),
    )
    domain = parse_plain(obj["domain"]) if obj.get("domain") else None
    tree = MeasureTree(obj["grid_base"], params, domain)
    for rec in obj["factors"]:
        tree.factors[(int(rec["level"]), int(rec["index"]))] = parse_frac(rec["factor"])
    tree._forest = None
    for entry in obj["entries"]:
        tree.entries.append(
            StageRecord(
                alpha=int(entry["alpha"]),
                anchor=parse_interval(entry["anchor"]),
                h_trace=tuple(parse_interval(i) for i in entry["h_trace"]),
                g_trace=tuple(parse_interval(i) for i in entry["g_trace"]),
                companions=tuple(
                    (int(c["base"]), parse_interval(c["interval"]))
                    for c in entry["companions"]
                ),
                x=None if entry["x"] is None else int(entry["x"]),
                style=entry["style"],
            )
        )
    return tree


_PARSERS = {
    "order-profile": parse_order_profile,
    "congruence-pair": parse_congruence_pair,
    "selection-certificate": parse_selection_certificate,
    "selection-family": parse_selection_family,
    "x-certificate": parse_x_certificate,
    "measure-tree": parse_measure_tree,
}


def loads(text: str):
    obj = json.loads(text)
    kind = obj.get("kind")
    parser = _PARSERS.get(kind)
    if parser is None:
        raise ValueError(f"no parser for kind {kind!r}")
    return parser(obj)
