"""Text, LaTeX and JSON renderings of command results.

Every renderer first builds a JSON-ready document; text and LaTeX are
produced from the same records so the three formats always agree.
"""

from __future__ import annotations

import json

import sympy as sp

from ..morphisms import Morphism
from ..quantize import ConfigOperator
from ..star import StarProduct
from .suites import Report

FORMATS = ("text", "latex", "json")


def _coef(c) -> str:
    return sp.sstr(c, order="lex")


def _simplified(c):
    return sp.simplify(c)


# -- documents ---------------------------------------------------------------

def operator_doc(op: ConfigOperator, target: str, method: str) -> dict:
    terms = []
    for (h, alpha) in sorted(op.terms, key=lambda k: (k[0], tuple(-a for a in k[1]))):
        c = _simplified(op.terms[(h, alpha)])
        if c != 0:
            terms.append({"hbar_power": h, "multi_index": list(alpha), "coefficient": _coef(c), "_expr": c})
    return {"kind": "operator", "target": target, "method": method,
            "coordinates": [c.name for c in op.coords], "terms": terms}


def morphism_doc(S: Morphism, target: str) -> dict:
    terms = []
    for h, op in enumerate(S.ops):
        for mu in sorted(op.terms, key=lambda m: tuple(-a for a in m)):
            c = _simplified(op.terms[mu].to_expr())
            if c != 0:
                terms.append({"hbar_power": h, "multi_index": list(mu), "coefficient": _coef(c), "_expr": c})
    return {"kind": "morphism", "target": target, "name": S.name, "order": S.order,
            "coordinates": [c.name for c in S.coords], "terms": terms}


def christoffel_doc(rows, coords, target: str) -> dict:
    entries = [{"upper": i, "lower": [j, k], "coefficient": _coef(c), "_expr": c} for i, j, k, c in rows]
    return {"kind": "christoffel", "target": target, "coordinates": [c.name for c in coords], "entries": entries}


def star_doc(prod: StarProduct, target: str) -> dict:
    names = [f"X{k + 1}" for k in range(prod.dim)] + [f"Y{k + 1}" for k in range(prod.dim)]
    fields = []
    for name, f in zip(names, prod.fields):
        comps = [_coef(_simplified(c.to_expr())) for c in f.a + f.b]
        fields.append({"name": name, "components": comps})
    terms = []
    for h in range(prod.order + 1):
        for c, a, b in prod.terms(h):
            terms.append({"hbar_power": h, "left": list(a), "right": list(b), "coefficient": _coef(c), "_expr": c})
    return {"kind": "star", "target": target, "order": prod.order,
            "coordinates": [c.name for c in prod.coords], "fields": fields, "terms": terms}


def report_doc(report: Report) -> dict:
    return report.to_json()


# -- text --------------------------------------------------------------------

def _slot_names(coords: list[str]) -> list[str]:
    return coords + [f"p_{c}" for c in coords]


def _monomial(alpha, names, d="d_", sep=" ") -> str:
    parts = []
    for k, name in zip(alpha, names):
        if k:
            parts.append(f"{d}{name}" + (f"^{k}" if k > 1 else ""))
    return sep.join(parts)


def _hbar(h: int) -> str:
    return "" if h == 0 else ("hbar" if h == 1 else f"hbar^{h}")


def _text_term(h, alpha, coef, names) -> str:
    pieces = [p for p in (_hbar(h), f"({coef})", _monomial(alpha, names)) if p]
    return " ".join(pieces)


def to_text(doc: dict) -> str:
    kind = doc["kind"]
    coords = doc.get("coordinates", [])
    if kind == "operator":
        lines = [f"{doc['target']} [{doc['method']}] on ({', '.join(coords)}):"]
        lines += ["  + " + _text_term(t["hbar_power"], t["multi_index"], t["coefficient"], coords) for t in doc["terms"]]
        return "\n".join(lines if doc["terms"] else lines + ["  0"])
    if kind == "morphism":
        names = _slot_names(coords)
        lines = [f"{doc['name']} for {doc['target']} through hbar^{doc['order']}:"]
        lines += ["  + " + _text_term(t["hbar_power"], t["multi_index"], t["coefficient"], names) for t in doc["terms"]]
        return "\n".join(lines)
    if kind == "christoffel":
        lines = [f"Christoffel symbols of {doc['target']} ({', '.join(coords)}):"]
        for e in doc["entries"]:
            j, k = e["lower"]
            lines.append(f"  Gamma^{coords[e['upper']]}_({coords[j]} {coords[k]}) = {e['coefficient']}")
        if not doc["entries"]:
            lines.append("  (all components vanish)")
        return "\n".join(lines)
    if kind == "star":
        names = [f["name"] for f in doc["fields"]]
        slots = _slot_names(coords)
        lines = [f"star product of {doc['target']} through hbar^{doc['order']}:", "fields:"]
        for f in doc["fields"]:
            comps = [f"({c}) d_{s}" for c, s in zip(f["components"], slots) if c != "0"]
            lines.append(f"  {f['name']} = " + (" + ".join(comps) or "0"))
        lines.append("terms (left words | right words):")
        for t in doc["terms"]:
            left = _monomial(t["left"], names, d="") or "1"
            right = _monomial(t["right"], names, d="") or "1"
            lines.append(f"  {_hbar(t['hbar_power']) or '1'}: ({t['coefficient']}) {left} | {right}")
        return "\n".join(lines)
    if kind == "report":
        lines = [f"suite {doc['suite']} (seed {doc['seed']})"]
        for c in doc["checks"]:
            h = "-" if c["hbar_order"] is None else str(c["hbar_order"])
            status = "PASS" if c["pass"] else "FAIL"
            lines.append(f"  {status} {c['id']} hbar^{h} residual={c['residual']:.3e} tol={c['tolerance']:.0e}")
        lines.append(f"{'PASS' if doc['passed'] else 'FAIL'}: {sum(c['pass'] for c in doc['checks'])}"
                     f"/{len(doc['checks'])} checks")
        return "\n".join(lines)
    raise ValueError(f"unknown document kind {kind!r}")


# -- LaTeX -------------------------------------------------------------------

def _tex(record: dict) -> str:
    return sp.latex(record["_expr"])


def _tex_name(name: str) -> str:
    return sp.latex(sp.Symbol(name))


def _tex_monomial(alpha, names) -> str:
    parts = []
    for k, name in zip(alpha, names):
        if k:
            parts.append(r"\partial_{" + _tex_name(name) + "}" + (f"^{{{k}}}" if k > 1 else ""))
    return " ".join(parts)


def _tex_hbar(h: int) -> str:
    return "" if h == 0 else (r"\hbar" if h == 1 else rf"\hbar^{{{h}}}")


def _tex_terms(terms, names) -> str:
    out = []
    for t in terms:
        piece = " ".join(p for p in (_tex_hbar(t["hbar_power"]), r"\left(" + _tex(t) + r"\right)",
                                     _tex_monomial(t["multi_index"], names)) if p)
        out.append(piece)
    return " \\\\\n  &+ ".join(out) if out else "0"


def to_latex(doc: dict) -> str:
    kind = doc["kind"]
    coords = doc.get("coordinates", [])
    if kind == "operator":
        body = "  " + r"\hat{H} &= " + _tex_terms(doc["terms"], coords)
        return "\\begin{align*}\n" + body + "\n\\end{align*}\n"
    if kind == "morphism":
        body = "  S &= " + _tex_terms(doc["terms"], _slot_names(coords))
        return "\\begin{align*}\n" + body + "\n\\end{align*}\n"
    if kind == "christoffel":
        rows = []
        for e in doc["entries"]:
            j, k = e["lower"]
            rows.append(rf"  \Gamma^{{{_tex_name(coords[e['upper']])}}}_{{{_tex_name(coords[j])} "
                        rf"{_tex_name(coords[k])}}} &= {_tex(e)}")
        body = " \\\\\n".join(rows) if rows else r"  \Gamma &= 0"
        return "\\begin{align*}\n" + body + "\n\\end{align*}\n"
    if kind == "star":
        names = [f["name"] for f in doc["fields"]]
        rows = []
        for t in doc["terms"]:
            left = " ".join(f"{n}^{{{k}}}" for n, k in zip(names, t["left"]) if k) or "1"
            right = " ".join(f"{n}^{{{k}}}" for n, k in zip(names, t["right"]) if k) or "1"
            rows.append(rf"  {_tex_hbar(t['hbar_power']) or '1'} &: \left({_tex(t)}\right)"
                        rf"\,\overleftarrow{{{left}}}\,\overrightarrow{{{right}}}")
        return "\\begin{align*}\n" + " \\\\\n".join(rows) + "\n\\end{align*}\n"
    if kind == "report":
        rows = [r"\begin{tabular}{llll}", r"check & $\hbar$ & residual & status \\"]
        for c in doc["checks"]:
            h = "--" if c["hbar_order"] is None else str(c["hbar_order"])
            ident = c["id"].replace("_", r"\_")
            rows.append(rf"\texttt{{{ident}}} & {h} & {c['residual']:.2e} & {'pass' if c['pass'] else 'fail'} \\")
        rows.append(r"\end{tabular}")
        return "\n".join(rows) + "\n"
    raise ValueError(f"unknown document kind {kind!r}")


def public(doc):
    """Drop private keys (symbolic payloads kept for LaTeX) from a document."""
    if isinstance(doc, dict):
        return {k: public(v) for k, v in doc.items() if not k.startswith("_")}
    if isinstance(doc, list):
        return [public(v) for v in doc]
    return doc


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(public(doc), indent=2, sort_keys=True) + "\n"
    if fmt == "latex":
        return to_latex(doc)
    if fmt == "text":
        return to_text(doc) + "\n"
    raise ValueError(f"unknown format {fmt!r}")
