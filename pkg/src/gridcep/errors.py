"""Exception types raised across the engine.

Everything derives from GridCepError so callers can catch broadly; the
harness CLI maps these to nonzero exits with the error name.
"""


class GridCepError(Exception):
    pass


# --- ontology / lifting ---

class CyclicHierarchy(GridCepError):
    """rdfs:subClassOf cycle; carries the offending cycle as a list of IRIs."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("subclass cycle: " + " -> ".join(str(c) for c in self.cycle))


class UnresolvedPrefix(GridCepError):
    def __init__(self, prefix, context=""):
        self.prefix = prefix
        super().__init__(f"unresolved prefix {prefix!r}" + (f" in {context}" if context else ""))


class UnknownSource(GridCepError):
    def __init__(self, source_id):
        self.source_id = source_id
        super().__init__(f"source {source_id} has no static triples")


class SchemaViolation(GridCepError):
    pass


class OutOfOrderInput(GridCepError):
    """Input stream violated its ordering contract."""

    def __init__(self, stream_id, seq, detail=""):
        self.stream_id = stream_id
        self.seq = seq
        super().__init__(f"out-of-order input on stream {stream_id!r} at seq {seq}"
                         + (f": {detail}" if detail else ""))


# --- pattern language ---

class PatternSyntaxError(GridCepError):
    def __init__(self, message, line, col, expected=()):
        self.line = line
        self.col = col
        self.expected = frozenset(expected)
        detail = f"{message} at line {line}, col {col}"
        if expected:
            detail += " (expected: " + ", ".join(sorted(self.expected)) + ")"
        super().__init__(detail)


class ValidationError(GridCepError):
    """Base for validation failures; `token` names the offending token."""

    def __init__(self, token, detail=""):
        self.token = token
        super().__init__(f"{type(self).__name__}: {token!r}" + (f" ({detail})" if detail else ""))


class UnknownStream(ValidationError):
    pass


class UndeclaredVariable(ValidationError):
    pass


class UnknownAttribute(ValidationError):
    pass


class UnresolvedQName(ValidationError):
    pass


# --- runtime ---

class OutOfOrder(GridCepError):
    """Event violates the merged-order ingest contract."""


class DuplicateId(GridCepError):
    pass


class UnknownPattern(GridCepError):
    pass


# --- simulator / actions / harness ---

class ConfigError(GridCepError):
    """Invalid scenario config; `path` is the offending JSON path."""

    def __init__(self, path, detail):
        self.path = path
        super().__init__(f"{path}: {detail}")


class UnknownTarget(GridCepError):
    pass


class DuplicateRule(GridCepError):
    pass
