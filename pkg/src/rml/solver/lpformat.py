"""CPLEX LP-format writer."""

from __future__ import annotations

import math
from typing import Sequence

from .model import LpModel

_WRAP = 8  # terms per output line


def _num(x: float) -> str:
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _terms(pairs: Sequence[tuple[float, str]]) -> list[str]:
    out = []
    for k, (a, name) in enumerate(pairs):
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        body = name if mag == 1.0 else f"{_num(mag)} {name}"
        if k == 0:
            out.append(f"- {body}" if a < 0 else body)
        else:
            out.append(f"{sign} {body}")
    return out


def _lines(prefix: str, terms: list[str], suffix: str = "") -> list[str]:
    if not terms:
        terms = ["0"]
    chunks = [" ".join(terms[i : i + _WRAP]) for i in range(0, len(terms), _WRAP)]
    lines = [f" {prefix}{chunks[0]}"]
    lines += [f"   {c}" for c in chunks[1:]]
    lines[-1] += suffix
    return lines


def export_lp_format(
    model: LpModel,
    quadratic_rows: Sequence[tuple[str, Sequence[tuple[float, str]], Sequence[tuple[float, str, str]], str, float]]
    = (),
) -> str:
    """Render ``model`` as LP-format text.

    ``quadratic_rows`` entries are ``(name, linear, bilinear, sense, rhs)`` where
    ``bilinear`` holds ``(coeff, var_a, var_b)``; they are appended to
    ``Subject To`` in the bracketed quadratic syntax.
    """
    names = model.var_names
    out = ["Maximize" if model.sense == "max" else "Minimize"]
    obj = [(c, names[j]) for j, c in enumerate(model.obj) if c != 0.0]
    terms = _terms(obj)
    if model.obj_offset:
        terms.append(("- " if model.obj_offset < 0 else "+ ") + _num(abs(model.obj_offset)))
    out += _lines("obj: ", terms)

    rows = []
    for name, row, sense, rhs in zip(model.row_names, model.rows, model.row_sense, model.rhs):
        pairs = [(a, names[j]) for j, a in sorted(row.items())]
        rows += _lines(f"{name}: ", _terms(pairs), f" {sense} {_num(rhs)}")
    for name, lin, bil, sense, rhs in quadratic_rows:
        q = ["["] + _terms([(c, f"{a} * {b}") for c, a, b in bil]) + ["]"]
        lin_terms = _terms(list(lin))
        if lin_terms and not lin_terms[0].startswith("-"):
            lin_terms[0] = "+ " + lin_terms[0]
        rows += _lines(f"{name}: ", q + lin_terms, f" {sense} {_num(rhs)}")
    if rows:
        out.append("Subject To")
        out += rows

    bounds = []
    for j, name in enumerate(names):
        lo, hi = model.lb[j], model.ub[j]
        if model.integer[j] and lo == 0.0 and hi == 1.0:
            continue
        if lo == 0.0 and math.isinf(hi):
            continue
        lo_s = "-inf" if math.isinf(lo) else _num(lo)
        hi_s = "+inf" if math.isinf(hi) else _num(hi)
        if lo == hi:
            bounds.append(f" {name} = {lo_s}")
        else:
            bounds.append(f" {lo_s} <= {name} <= {hi_s}")
    if bounds:
        out.append("Bounds")
        out += bounds

    binaries = [n for j, n in enumerate(names) if model.integer[j] and model.lb[j] == 0.0 and model.ub[j] == 1.0]
    generals = [n for j, n in enumerate(names) if model.integer[j] and n not in set(binaries)]
    if binaries:
        out.append("Binaries")
        out += [" " + " ".join(binaries[i : i + _WRAP]) for i in range(0, len(binaries), _WRAP)]
    if generals:
        out.append("Generals")
        out += [" " + " ".join(generals[i : i + _WRAP]) for i in range(0, len(generals), _WRAP)]
    out.append("End")
    return "\n".join(out) + "\n"
