"""Pattern queries over per-instance weighted DAGs.

Grammar (conjunctions only; all predicates read aggregated values):

    query     :=  predicate ( "&&" predicate )*
    predicate :=  mass(NODE) CMP NUM
               |  count(level=INT, min_mass=NUM) CMP INT
               |  top(level=INT) == NODE
               |  split(NODE, NODE, tol=NUM)
               |  entropy(level=INT) CMP NUM
    CMP       :=  <  <=  ==  >=  >

``count`` counts the nodes of a level whose aggregate is at least min_mass.
``split`` holds when the two aggregates differ by at most the tolerance, both
carry at least the minimum mass (0.1 unless overridden at parse time), and
neither node is an ancestor of the other. Nodes and levels are checked against
the DAG when the query is parsed, not when it runs.
"""

import operator
import re
from dataclasses import dataclass

from .errors import QuerySyntaxError, UnknownLevel, UnknownNode
from .metrics import level_entropy, top_node_at_level

DEFAULT_SPLIT_MIN_MASS = 0.1

_COMPARATORS = {
    "<": operator.lt,
    "<=": operator.le,
    "==": operator.eq,
    ">=": operator.ge,
    ">": operator.gt,
}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<and>&&)|(?P<cmp>==|<=|>=|<|>)|(?P<eq>=)|(?P<lparen>\()|(?P<rparen>\))"
    r"|(?P<comma>,)|(?P<atom>[A-Za-z0-9_.\-]+))"
)


@dataclass(frozen=True)
class MassPredicate:
    node: str
    op: str
    threshold: float

    def evaluate(self, wd, dag):
        return _COMPARATORS[self.op](wd.aggregates.get(self.node, 0.0), self.threshold)

    def describe(self):
        return f"mass({self.node}) {self.op} {self.threshold:g}"


@dataclass(frozen=True)
class CountPredicate:
    level: int
    min_mass: float
    op: str
    count: int

    def evaluate(self, wd, dag):
        nodes = dag.nodes_at_level(self.level)
        considered = sum(1 for n in nodes if wd.aggregates.get(n, 0.0) >= self.min_mass)
        return _COMPARATORS[self.op](considered, self.count)

    def describe(self):
        return f"count(level={self.level}, min_mass={self.min_mass:g}) {self.op} {self.count}"


@dataclass(frozen=True)
class TopPredicate:
    level: int
    node: str

    def evaluate(self, wd, dag):
        return top_node_at_level(wd, dag, self.level) == self.node

    def describe(self):
        return f"top(level={self.level}) == {self.node}"


@dataclass(frozen=True)
class SplitPredicate:
    node_a: str
    node_b: str
    tolerance: float
    min_mass: float
    related: bool  # fixed by the DAG at parse time

    def evaluate(self, wd, dag):
        if self.related:
            return False
        a = wd.aggregates.get(self.node_a, 0.0)
        b = wd.aggregates.get(self.node_b, 0.0)
        return a >= self.min_mass and b >= self.min_mass and abs(a - b) <= self.tolerance

    def describe(self):
        return f"split({self.node_a}, {self.node_b}, tol={self.tolerance:g})"


@dataclass(frozen=True)
class EntropyPredicate:
    level: int
    op: str
    threshold: float

    def evaluate(self, wd, dag):
        return _COMPARATORS[self.op](level_entropy(wd, dag, self.level), self.threshold)

    def describe(self):
        return f"entropy(level={self.level}) {self.op} {self.threshold:g}"


@dataclass(frozen=True)
class PatternQuery:
    text: str
    predicates: tuple
    split_min_mass: float = DEFAULT_SPLIT_MIN_MASS

    def evaluate(self, wd, dag):
        return all(p.evaluate(wd, dag) for p in self.predicates)

    def describe(self):
        return " && ".join(p.describe() for p in self.predicates)


class _Tokens:
    def __init__(self, text):
        self.text = text
        self.items = []  # (kind, value, position)
        pos = 0
        while pos < len(text):
            match = _TOKEN_RE.match(text, pos)
            if match is None or match.end() == pos:
                at = pos
                while at < len(text) and text[at].isspace():
                    at += 1
                raise QuerySyntaxError(text, at, f"unexpected character {text[at]!r}")
            kind = match.lastgroup
            self.items.append((kind, match.group(kind), match.start(kind)))
            pos = match.end()
        self.index = 0

    def peek(self):
        if self.index < len(self.items):
            return self.items[self.index]
        return ("end", "", len(self.text))

    def next(self):
        token = self.peek()
        self.index += 1
        return token

    def expect(self, kind, what):
        token = self.next()
        if token[0] != kind:
            raise QuerySyntaxError(self.text, token[2], f"expected {what}, found {token[1]!r}")
        return token


def parse_query(text, dag, split_min_mass=DEFAULT_SPLIT_MIN_MASS) -> PatternQuery:
    """Parse and validate a query against a DAG.

    Raises QuerySyntaxError with the offending column, or UnknownNode /
    UnknownLevel when an identifier does not exist in the hierarchy.
    """
    tokens = _Tokens(text)
    predicates = [_parse_predicate(tokens, dag, split_min_mass)]
    while tokens.peek()[0] == "and":
        tokens.next()
        predicates.append(_parse_predicate(tokens, dag, split_min_mass))
    trailing = tokens.peek()
    if trailing[0] != "end":
        raise QuerySyntaxError(text, trailing[2], f"unexpected {trailing[1]!r} after predicate")
    return PatternQuery(text=text, predicates=tuple(predicates), split_min_mass=split_min_mass)


def _parse_predicate(tokens, dag, split_min_mass):
    kind, name, pos = tokens.expect("atom", "a predicate name")
    if name == "mass":
        tokens.expect("lparen", "'('")
        node = _node_arg(tokens, dag)
        tokens.expect("rparen", "')'")
        op = _comparator(tokens)
        return MassPredicate(node, op, _number(tokens, "a threshold"))
    if name == "count":
        tokens.expect("lparen", "'('")
        level = _kwarg_int(tokens, dag, "level")
        tokens.expect("comma", "','")
        min_mass = _kwarg_number(tokens, "min_mass")
        tokens.expect("rparen", "')'")
        op = _comparator(tokens)
        return CountPredicate(level, min_mass, op, _integer(tokens, "a node count"))
    if name == "top":
        tokens.expect("lparen", "'('")
        level = _kwarg_int(tokens, dag, "level")
        tokens.expect("rparen", "')'")
        op_token = tokens.expect("cmp", "'=='")
        if op_token[1] != "==":
            raise QuerySyntaxError(tokens.text, op_token[2], "top() supports only '=='")
        return TopPredicate(level, _node_arg(tokens, dag))
    if name == "split":
        tokens.expect("lparen", "'('")
        node_a = _node_arg(tokens, dag)
        tokens.expect("comma", "','")
        node_b = _node_arg(tokens, dag)
        tokens.expect("comma", "','")
        tolerance = _kwarg_number(tokens, "tol")
        tokens.expect("rparen", "')'")
        if tolerance < 0:
            raise QuerySyntaxError(tokens.text, pos, "tolerance must be >= 0")
        return SplitPredicate(
            node_a, node_b, tolerance, split_min_mass, related=dag.is_related(node_a, node_b)
        )
    if name == "entropy":
        tokens.expect("lparen", "'('")
        level = _kwarg_int(tokens, dag, "level")
        tokens.expect("rparen", "')'")
        op = _comparator(tokens)
        return EntropyPredicate(level, op, _number(tokens, "an entropy threshold"))
    raise QuerySyntaxError(
        tokens.text, pos, f"unknown predicate {name!r}; one of mass, count, top, split, entropy"
    )


def _node_arg(tokens, dag):
    _, value, pos = tokens.expect("atom", "a node id")
    if value not in dag:
        raise UnknownNode(value, context=f"query column {pos}")
    return value


def _kwarg_int(tokens, dag, keyword):
    _, value, pos = tokens.expect("atom", f"'{keyword}='")
    if value != keyword:
        raise QuerySyntaxError(tokens.text, pos, f"expected '{keyword}=', found {value!r}")
    tokens.expect("eq", "'='")
    _, raw, pos = tokens.expect("atom", "an integer")
    try:
        level = int(raw)
    except ValueError:
        raise QuerySyntaxError(tokens.text, pos, f"expected an integer, found {raw!r}") from None
    if level not in dag.levels:
        raise UnknownLevel(level, known=dag.levels)
    return level


def _kwarg_number(tokens, keyword):
    _, value, pos = tokens.expect("atom", f"'{keyword}='")
    if value != keyword:
        raise QuerySyntaxError(tokens.text, pos, f"expected '{keyword}=', found {value!r}")
    tokens.expect("eq", "'='")
    return _number(tokens, "a number")


def _number(tokens, what):
    _, raw, pos = tokens.expect("atom", what)
    try:
        return float(raw)
    except ValueError:
        raise QuerySyntaxError(tokens.text, pos, f"expected {what}, found {raw!r}") from None


def _integer(tokens, what):
    _, raw, pos = tokens.expect("atom", what)
    try:
        return int(raw)
    except ValueError:
        raise QuerySyntaxError(tokens.text, pos, f"expected {what}, found {raw!r}") from None


def _comparator(tokens):
    token = tokens.expect("cmp", "a comparator (< <= == >= >)")
    return token[1]


def filter_instances(query: PatternQuery, wds, dag):
    """Evaluate a query over a collection; returns (sorted matching ids, fraction).

    Results depend only on the set of instances, not their order.
    """
    matched = []
    total = 0
    for wd in wds:
        total += 1
        if query.evaluate(wd, dag):
            matched.append(wd.instance_id)
    matched.sort()
    fraction = (len(matched) / total) if total else 0.0
    return matched, fraction
