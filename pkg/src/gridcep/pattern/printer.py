"""Canonical pretty-printer; parse(format(ast)) == ast.

Canonical form: tight commas inside
SELECT/FROM/ON/WINDOW argument lists, ` . ` between triple patterns,
` | ` before the CEP segment, and conditions printed without spaces.
"""

from __future__ import annotations

from .ast import Aggregate, AttrRef, Condition, Expr, Join, Number, PatternAst, Seq


def _fmt_number(n: Number) -> str:
    v = n.value
    if isinstance(v, int) or (isinstance(v, float) and v.is_integer()):
        return str(int(v))
    return repr(v)


def _fmt_atom(atom) -> str:
    if isinstance(atom, Number):
        return _fmt_number(atom)
    if isinstance(atom, AttrRef):
        if atom.var is None:
            return atom.attr
        if atom.attr == "":
            return f"?{atom.var}"
        return f"?{atom.var}.{atom.attr}"
    raise TypeError(f"not an atom: {atom!r}")


def _fmt_expr(expr: Expr) -> str:
    parts = []
    for i, (op, atom) in enumerate(expr.terms):
        if i > 0:
            parts.append(op)
        parts.append(_fmt_atom(atom))
    return "".join(parts)


def _fmt_cond(cond: Condition) -> str:
    return f"{_fmt_expr(cond.lhs)}{cond.rel}{_fmt_expr(cond.rhs)}"


def _fmt_term(term: tuple) -> str:
    kind, text = term
    return f"?{text}" if kind == "var" else text


def _fmt_eterm(et) -> str:
    if et.guards:
        return f"?{et.variable}({','.join(_fmt_cond(c) for c in et.guards)})"
    return f"?{et.variable}"


def _fmt_width(width) -> str:
    return str(width)  # Duration.__str__ gives e.g. 5min; ints print as-is


def _fmt_cep(cep) -> str:
    if isinstance(cep, Seq):
        return f"SEQ({_fmt_eterm(cep.first)}, {_fmt_eterm(cep.second)} within {cep.within})"
    if isinstance(cep, Join):
        conds = ",".join(_fmt_cond(c) for c in cep.on)
        return f"JOIN(?{cep.left},?{cep.right}) ON({conds})"
    if isinstance(cep, Aggregate):
        out = f"{cep.fn}(?{cep.over}) AS {cep.alias}"
        if cep.window is not None:
            w = cep.window
            out += f" WINDOW(?{w.over},{w.mode},{_fmt_width(w.width)})"
        if cep.having is not None:
            out += f" HAVING({_fmt_cond(cep.having)})"
        return out
    raise TypeError(f"not a CEP expression: {cep!r}")


def format_pattern(ast: PatternAst) -> str:
    """Render the canonical single-line text of a pattern AST."""
    parts = []
    projs = ",".join(f"?{name}" if kind == "var" else name for kind, name in ast.select)
    parts.append(f"SELECT({projs})")
    for fc in ast.from_clauses:
        vars_part = ",".join(f"?{v}" for v in fc.variables)
        parts.append(f"FROM({vars_part},{fc.stream_id})")
    if ast.where:
        tpats = " . ".join(
            f"{_fmt_term(tp.subject)} {_fmt_term(tp.predicate)} {_fmt_term(tp.object)}"
            for tp in ast.where)
        parts.append("WHERE {" + tpats + "}")
    text = " ".join(parts)
    if ast.cep is not None:
        text += " | " + _fmt_cep(ast.cep)
    return text
