"""Exception types shared across the toolkit."""


class AbsalignError(Exception):
    """Base class for every error raised by this package."""


# ---------------------------------------------------------------- DAG errors

class DagError(AbsalignError):
    pass


class CycleDetected(DagError):
    """The hierarchy contains a cycle; ``cycle`` names one offending loop."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cycle detected: " + " -> ".join(self.cycle))


class UnknownNode(DagError):
    def __init__(self, node_id, context=""):
        self.node_id = node_id
        msg = f"unknown node id: {node_id!r}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


class DuplicateNode(DagError):
    def __init__(self, node_id):
        self.node_id = node_id
        super().__init__(f"duplicate node id: {node_id!r}")


class UnknownLevel(DagError):
    def __init__(self, level, known=()):
        self.level = level
        msg = f"no nodes at level {level!r}"
        if known:
            msg += f" (levels present: {sorted(known)})"
        super().__init__(msg)


class EmptySelection(DagError):
    def __init__(self, selector):
        self.selector = selector
        super().__init__(f"selector resolves to an empty node set: {selector}")


# ------------------------------------------------------------- parse errors

class IngestError(AbsalignError):
    pass


class UnknownFormat(IngestError):
    def __init__(self, detail):
        super().__init__(f"unknown hierarchy format: {detail}")


class MalformedLine(IngestError):
    def __init__(self, source, lineno, message):
        self.source = str(source)
        self.lineno = lineno
        super().__init__(f"{source}:{lineno}: {message}")


class LengthMismatch(IngestError):
    def __init__(self, source, lineno, got, expected):
        self.lineno = lineno
        super().__init__(
            f"{source}:{lineno}: dense vector has {got} entries, mapping has {expected}"
        )


class NegativeValue(IngestError):
    def __init__(self, source, lineno, detail):
        self.lineno = lineno
        super().__init__(f"{source}:{lineno}: negative value {detail}")


class UnknownNodeKey(IngestError):
    def __init__(self, source, lineno, key):
        self.key = key
        super().__init__(f"{source}:{lineno}: key {key!r} is not a node in the hierarchy")


class DuplicateInstanceId(IngestError):
    def __init__(self, source, lineno, instance_id):
        self.instance_id = instance_id
        super().__init__(f"{source}:{lineno}: duplicate instance id {instance_id!r}")


class NotNormalized(IngestError):
    def __init__(self, source, lineno, total):
        super().__init__(
            f"{source}:{lineno}: vector declared normalized but sums to {total!r}"
        )


# ------------------------------------------------------------ metric errors

class MetricError(AbsalignError):
    pass


class EmptyCollection(MetricError):
    def __init__(self, what="instance collection"):
        super().__init__(f"empty {what}")


class MissingTruth(MetricError):
    def __init__(self, instance_id):
        self.instance_id = instance_id
        super().__init__(f"no ground-truth label for instance {instance_id!r}")


class SamePairNode(MetricError):
    def __init__(self, node_id):
        super().__init__(f"pair uses the same node twice: {node_id!r}")


# ------------------------------------------------------------- query errors

class QuerySyntaxError(AbsalignError):
    def __init__(self, text, position, message):
        self.text = text
        self.position = position
        caret = " " * position + "^"
        super().__init__(f"query syntax error at column {position}: {message}\n  {text}\n  {caret}")
