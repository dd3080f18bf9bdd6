"""Triple-based domain ontology with subclass inference and BGP matching.

Terms are plain Python values: `Iri` (a str subclass) for IRIs, `Var` for
pattern variables, and int/float/str for literals. Stored triples never
contain variables. Subclass closure over rdfs:subClassOf is precomputed at
load time and applied transparently when a triple pattern queries rdf:type.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import CyclicHierarchy, UnresolvedPrefix

DEFAULT_NAMESPACES = {
    "evt": "http://gridcep.dev/event#",
    "bd": "http://gridcep.dev/building#",
    "ee": "http://gridcep.dev/equipment#",
    "org": "http://gridcep.dev/organization#",
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
}


class Iri(str):
    """Absolute IRI; a distinct type so IRIs never collide with string literals."""

    __slots__ = ()

    def __repr__(self):
        return f"Iri({str.__repr__(self)})"


class Var(str):
    """Pattern variable (name without the leading '?'). Only valid in patterns."""

    __slots__ = ()

    def __repr__(self):
        return f"Var({str.__repr__(self)})"


@dataclass(frozen=True)
class Triple:
    subject: Iri
    predicate: Iri
    object: object  # Iri or literal (int/float/str)


RDF_TYPE = Iri(DEFAULT_NAMESPACES["rdf"] + "type")
RDFS_SUBCLASS = Iri(DEFAULT_NAMESPACES["rdfs"] + "subClassOf")

_QNAME_RE = re.compile(r"^([A-Za-z_][\w.-]*):([\w.-]+)$")


def expand_qname(qname: str, namespaces: dict[str, str]) -> Iri:
    """Expand `prefix:local` against a prefix map. Raises UnresolvedPrefix."""
    m = _QNAME_RE.match(qname)
    if not m:
        raise UnresolvedPrefix(qname, "not a QName")
    prefix, local = m.groups()
    base = namespaces.get(prefix)
    if base is None:
        raise UnresolvedPrefix(prefix, qname)
    return Iri(base + local)


def compact_iri(iri: Iri, namespaces: dict[str, str]) -> str:
    """Render as a QName when a prefix matches, else `<full>`."""
    for prefix, base in namespaces.items():
        if iri.startswith(base):
            return f"{prefix}:{iri[len(base):]}"
    return f"<{iri}>"


class Ontology:
    """Immutable in-memory triple store with precomputed subclass closure.

    Indexes are built once at construction; matching helpers return stored
    values in insertion order, which keeps downstream evaluation
    deterministic for a given load order.
    """

    def __init__(self, triples: list[Triple], namespaces: dict[str, str] | None = None):
        ns = dict(DEFAULT_NAMESPACES)
        if namespaces:
            ns.update(namespaces)
        self.namespaces: dict[str, str] = ns
        self.triples: list[Triple] = []
        self._spo: dict[tuple, list] = {}         # (s, p) -> [o] in insertion order
        self._by_pred: dict[Iri, list] = {}       # p -> [(s, o)]
        self._pos: dict[tuple, list] = {}         # (p, o) -> [s]
        self._seen: set[tuple] = set()
        for t in triples:
            self._add(t)
        self._closure = self._build_closure()

    def _add(self, t: Triple) -> None:
        if isinstance(t.subject, Var) or isinstance(t.predicate, Var) or isinstance(t.object, Var):
            raise ValueError(f"stored triples may not contain variables: {t}")
        key = (t.subject, t.predicate, t.object)
        if key in self._seen:
            return
        self._seen.add(key)
        self.triples.append(t)
        self._spo.setdefault((t.subject, t.predicate), []).append(t.object)
        self._by_pred.setdefault(t.predicate, []).append((t.subject, t.object))
        self._pos.setdefault((t.predicate, t.object), []).append(t.subject)

    def _build_closure(self) -> dict[Iri, set[Iri]]:
        """descendants[c] = {c} ∪ all transitive subclasses of c. Rejects cycles."""
        children: dict[Iri, list[Iri]] = {}
        for sub, sup in self._by_pred.get(RDFS_SUBCLASS, []):
            children.setdefault(sup, []).append(sub)
            children.setdefault(sub, children.get(sub, []))

        closure: dict[Iri, set[Iri]] = {}
        state: dict[Iri, int] = {}  # 1 = on stack, 2 = done

        def visit(node: Iri, stack: list[Iri]) -> set[Iri]:
            if state.get(node) == 2:
                return closure[node]
            if state.get(node) == 1:
                raise CyclicHierarchy(stack[stack.index(node):] + [node])
            state[node] = 1
            stack.append(node)
            acc = {node}
            for child in children.get(node, []):
                acc |= visit(child, stack)
            stack.pop()
            state[node] = 2
            closure[node] = acc
            return acc

        for node in list(children):
            visit(node, [])
        return closure

    # --- queries ---

    def subclasses_of(self, class_iri: Iri) -> set[Iri]:
        """The class plus all transitive subclasses (reflexive)."""
        return set(self._closure.get(class_iri, {class_iri}))

    def has(self, s, p, o) -> bool:
        return o in self._spo.get((s, p), ())

    def objects(self, s, p) -> list:
        return [obj for subj, obj in self._by_pred.get(p, []) if subj == s]

    def subjects(self, p, o) -> list:
        return list(self._pos.get((p, o), ()))

    def pairs(self, p) -> list:
        return list(self._by_pred.get(p, ()))

    def expand(self, qname: str) -> Iri:
        return expand_qname(qname, self.namespaces)

    def compact(self, iri: Iri) -> str:
        return compact_iri(iri, self.namespaces)


def load_ontology(triples: list[Triple], namespaces: dict[str, str] | None = None) -> Ontology:
    """Build an ontology; precomputes subclass closure, rejects subclass cycles."""
    return Ontology(triples, namespaces)


# --- text format: `@prefix p: <iri> .` declarations + `<s> <p> <o> .` lines ---

_LITERAL_RE = re.compile(r'^"(.*)"$')


def _parse_term(token: str, namespaces: dict[str, str]):
    if token.startswith("<") and token.endswith(">"):
        return Iri(token[1:-1])
    m = _LITERAL_RE.match(token)
    if m:
        return m.group(1)
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    return expand_qname(token, namespaces)


def _split_terms(body: str) -> list[str]:
    """Split a triple line body into terms; quoted literals may hold spaces."""
    terms, i, n = [], 0, len(body)
    while i < n:
        if body[i].isspace():
            i += 1
            continue
        if body[i] == '"':
            j = body.index('"', i + 1)
            terms.append(body[i:j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not body[j].isspace():
                j += 1
            terms.append(body[i:j])
            i = j
    return terms


def parse_ontology_text(text: str) -> Ontology:
    """Parse the line-oriented triple format (N-Triples-compatible subset)."""
    namespaces = dict(DEFAULT_NAMESPACES)
    triples: list[Triple] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("@prefix"):
            m = re.match(r"@prefix\s+([\w-]+):\s*<([^>]*)>\s*\.?$", line)
            if not m:
                raise ValueError(f"line {lineno}: malformed @prefix declaration")
            namespaces[m.group(1)] = m.group(2)
            continue
        if not line.endswith("."):
            raise ValueError(f"line {lineno}: triple line must end with '.'")
        terms = _split_terms(line[:-1].strip())
        if len(terms) != 3:
            raise ValueError(f"line {lineno}: expected 3 terms, got {len(terms)}")
        s = _parse_term(terms[0], namespaces)
        p = _parse_term(terms[1], namespaces)
        o = _parse_term(terms[2], namespaces)
        if not isinstance(s, Iri) or not isinstance(p, Iri):
            raise ValueError(f"line {lineno}: subject and predicate must be IRIs")
        triples.append(Triple(s, p, o))
    return Ontology(triples, namespaces)


def serialize_ontology(ont: Ontology) -> str:
    """Deterministic text serialization: sorted prefixes, sorted triples."""

    def fmt(term):
        if isinstance(term, Iri):
            return ont.compact(term)
        if isinstance(term, str):
            return f'"{term}"'
        if isinstance(term, float) and term.is_integer():
            return str(int(term))
        return str(term)

    lines = [f"@prefix {p}: <{base}> ." for p, base in sorted(ont.namespaces.items())]
    lines.append("")
    body = sorted(f"{fmt(t.subject)} {fmt(t.predicate)} {fmt(t.object)} ." for t in ont.triples)
    return "\n".join(lines + body) + "\n"


# --- BGP matching ---

@dataclass(frozen=True)
class TriplePattern:
    """A triple pattern with Iri/Var/literal terms (post QName resolution)."""

    subject: object
    predicate: object
    object: object

    def variables(self) -> set[str]:
        return {str(t) for t in (self.subject, self.predicate, self.object) if isinstance(t, Var)}


def _values_equal(a, b) -> bool:
    """Typed literal comparison: numbers numerically, everything else exact."""
    if isinstance(a, Iri) != isinstance(b, Iri):
        return False
    if isinstance(a, bool) or isinstance(b, bool):
        return a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return float(a) == float(b)
    return a == b


class GraphView:
    """Ontology plus an optional overlay of per-event lifted triples."""

    def __init__(self, ontology: Ontology, overlay: list[Triple] = ()):  # type: ignore[assignment]
        self.ontology = ontology
        self.overlay = list(overlay)

    def candidates(self, tp: TriplePattern, binding: dict[str, object]):
        """Yield stored (s, p, o) triples matching tp's constant terms and
        current bindings; `match_bgp` only has to bind/check variables.

        An `rdf:type` pattern with a constant class object is expanded
        through the subclass closure, which is what makes
        `?loc rdf:type bd:Office` reach rooms typed as any Office subclass.
        """
        s = binding.get(str(tp.subject)) if isinstance(tp.subject, Var) else tp.subject
        p = binding.get(str(tp.predicate)) if isinstance(tp.predicate, Var) else tp.predicate
        o = binding.get(str(tp.object)) if isinstance(tp.object, Var) else tp.object

        if p == RDF_TYPE and not isinstance(tp.object, Var) and isinstance(o, Iri):
            classes = self.ontology.subclasses_of(o)
            for cls in sorted(classes):
                yield from self._scan(s, p, cls, exact_object=True)
            return
        yield from self._scan(s, p, o, exact_object=o is not None)

    def _scan(self, s, p, o, exact_object):
        if s is not None and p is not None:
            for obj in self.ontology._spo.get((s, p), ()):
                if not exact_object or _values_equal(obj, o):
                    yield s, p, obj
            for t in self.overlay:
                if t.subject == s and t.predicate == p and \
                        (not exact_object or _values_equal(t.object, o)):
                    yield s, p, t.object
        elif p is not None:
            for subj, obj in self.ontology.pairs(p):
                if exact_object and not _values_equal(obj, o):
                    continue
                yield subj, p, obj
            for t in self.overlay:
                if t.predicate != p:
                    continue
                if exact_object and not _values_equal(t.object, o):
                    continue
                yield t.subject, p, t.object
        else:
            for t in list(self.ontology.triples) + self.overlay:
                if s is not None and t.subject != s:
                    continue
                if exact_object and not _values_equal(t.object, o):
                    continue
                yield t.subject, t.predicate, t.object


def match_bgp(patterns: list[TriplePattern], view: GraphView,
              binding: dict[str, object] | None = None) -> list[dict[str, object]]:
    """All solution mappings for a BGP, by backtracking join.

    Patterns are tried most-bound-first at each step; result order is
    deterministic for a given store construction order.
    """
    binding = dict(binding or {})

    def bound_count(tp: TriplePattern, b) -> int:
        n = 0
        for term in (tp.subject, tp.predicate, tp.object):
            if not isinstance(term, Var) or str(term) in b:
                n += 1
        return n

    solutions: list[dict[str, object]] = []

    def step(remaining: list[TriplePattern], b: dict[str, object]):
        if not remaining:
            solutions.append(dict(b))
            return
        tp = max(remaining, key=lambda t: bound_count(t, b))
        rest = [t for t in remaining if t is not tp]
        for s, p, o in view.candidates(tp, b):
            nb = dict(b)
            ok = True
            # constants are already filtered by candidates(); bind variables
            for term, val in ((tp.subject, s), (tp.predicate, p), (tp.object, o)):
                if isinstance(term, Var):
                    name = str(term)
                    if name in nb:
                        if not _values_equal(nb[name], val):
                            ok = False
                            break
                    else:
                        nb[name] = val
            if ok:
                step(rest, nb)

    step(list(patterns), binding)
    return solutions
