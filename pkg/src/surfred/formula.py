"""Boolean formulas: parsing, OR elimination and planar circuit layout."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union


class FormulaParseError(ValueError):
    pass


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Not:
    child: "Node"


@dataclass(frozen=True)
class And:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Or:
    left: "Node"
    right: "Node"


Node = Union[Var, Not, And, Or]


@dataclass(frozen=True)
class Formula:
    root: Node
    num_vars: int

    def __post_init__(self):
        used = set(leaf_variables(self.root))
        missing = set(range(1, self.num_vars + 1)) - used
        if missing:
            raise FormulaParseError(f"variables never referenced: {sorted(missing)}")
        if used - set(range(1, self.num_vars + 1)):
            raise FormulaParseError("variable index exceeds declared count")

    def __str__(self) -> str:
        return to_expression(self.root)


def leaf_variables(node: Node) -> List[int]:
    """Variable indices of the leaves, left to right."""
    out: List[int] = []
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Var):
            out.append(n.index)
        elif isinstance(n, Not):
            stack.append(n.child)
        else:
            stack.append(n.right)
            stack.append(n.left)
    return out


def to_expression(node: Node) -> str:
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Not):
        return "!" + to_expression(node.child)
    op = "&" if isinstance(node, And) else "|"
    return f"({to_expression(node.left)}{op}{to_expression(node.right)})"


# -- parsing -------------------------------------------------------------

def parse_expression(text: str) -> Formula:
    """Parse ``expr := var | '!' expr | '(' expr ('&'|'|') expr ')'``."""
    pos = 0

    def skip():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def expr() -> Node:
        nonlocal pos
        skip()
        if pos >= len(text):
            raise FormulaParseError(f"unexpected end of input at position {pos}")
        ch = text[pos]
        if ch == "!":
            pos += 1
            return Not(expr())
        if ch == "(":
            pos += 1
            left = expr()
            skip()
            if pos >= len(text) or text[pos] not in "&|":
                raise FormulaParseError(f"expected '&' or '|' at position {pos}")
            op = text[pos]
            pos += 1
            right = expr()
            skip()
            if pos >= len(text) or text[pos] != ")":
                raise FormulaParseError(f"expected ')' at position {pos}")
            pos += 1
            return And(left, right) if op == "&" else Or(left, right)
        if ch == "x":
            start = pos
            pos += 1
            while pos < len(text) and text[pos].isdigit():
                pos += 1
            digits = text[start + 1:pos]
            if not digits or int(digits) < 1:
                raise FormulaParseError(f"bad variable name at position {start}")
            return Var(int(digits))
        raise FormulaParseError(f"unexpected character {ch!r} at position {pos}")

    root = expr()
    skip()
    if pos != len(text):
        raise FormulaParseError(f"trailing input at position {pos}")
    return Formula(root, max(leaf_variables(root)))


def _fold(op, items: Sequence[Node]) -> Node:
    """Right fold: a, b, c -> op(a, op(b, c))."""
    node = items[-1]
    for item in reversed(items[:-1]):
        node = op(item, node)
    return node


def parse_dimacs(text: str) -> Formula:
    """DIMACS CNF as a right-folded AND of right-folded OR clauses."""
    num_vars = num_clauses = None
    clauses: List[List[int]] = []
    current: List[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise FormulaParseError(f"line {lineno}: bad problem line {line!r}")
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise FormulaParseError(f"line {lineno}: bad problem line {line!r}") from None
            continue
        if num_vars is None:
            raise FormulaParseError(f"line {lineno}: clause before problem line")
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise FormulaParseError(f"line {lineno}: bad literal {token!r}") from None
            if abs(lit) > num_vars:
                raise FormulaParseError(f"line {lineno}: variable {abs(lit)} exceeds header count {num_vars}")
            if lit == 0:
                if not current:
                    raise FormulaParseError(f"line {lineno}: empty clause")
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(current)
    if num_vars is None:
        raise FormulaParseError("missing problem line")
    if not clauses:
        raise FormulaParseError("no clauses")
    if num_clauses is not None and num_clauses != len(clauses):
        raise FormulaParseError(f"header declares {num_clauses} clauses, found {len(clauses)}")
    lit_node = lambda l: Var(l) if l > 0 else Not(Var(-l))
    clause_nodes = [_fold(Or, [lit_node(l) for l in c]) for c in clauses]
    return Formula(_fold(And, clause_nodes), num_vars)


def parse_formula(text: str) -> Formula:
    """Dispatch on content: DIMACS if a ``p cnf`` line is present."""
    if any(line.strip().startswith("p cnf") for line in text.splitlines()):
        return parse_dimacs(text)
    return parse_expression(text.strip())


# -- semantics ------------------------------------------------------------

def _eval(node: Node, values: Sequence[bool]) -> bool:
    if isinstance(node, Var):
        return values[node.index - 1]
    if isinstance(node, Not):
        return not _eval(node.child, values)
    if isinstance(node, And):
        return _eval(node.left, values) and _eval(node.right, values)
    return _eval(node.left, values) or _eval(node.right, values)


def evaluate(f: Formula, assignment: Sequence[bool]) -> bool:
    if len(assignment) != f.num_vars:
        raise ValueError(f"assignment has {len(assignment)} values, formula has {f.num_vars} variables")
    return _eval(f.root, [bool(v) for v in assignment])


def assignments(n: int):
    """All 2^n assignments, x1 as the most significant bit."""
    return itertools.product((False, True), repeat=n)


def brute_force_count(f: Formula, max_vars: int = 24) -> int:
    if f.num_vars > max_vars:
        raise ValueError(f"{f.num_vars} variables exceed the enumeration limit {max_vars}")
    return sum(1 for a in assignments(f.num_vars) if _eval(f.root, a))


def eliminate_or(f: Formula) -> Formula:
    """Rewrite every OR as NOT(AND(NOT, NOT))."""

    def walk(node: Node) -> Node:
        if isinstance(node, Var):
            return node
        if isinstance(node, Not):
            return Not(walk(node.child))
        if isinstance(node, And):
            return And(walk(node.left), walk(node.right))
        return Not(And(Not(walk(node.left)), Not(walk(node.right))))

    return Formula(walk(f.root), f.num_vars)


def has_or(node: Node) -> bool:
    if isinstance(node, Var):
        return False
    if isinstance(node, Or):
        return True
    if isinstance(node, Not):
        return has_or(node.child)
    return has_or(node.left) or has_or(node.right)


# -- planar circuit ---------------------------------------------------------

@dataclass(frozen=True)
class FanoutGate:
    """A two-output copy gate.  ``source`` is the leaf slot whose lane feeds it
    (None for the variable's own input column), outputs go to the listed slots."""

    variable: int
    band: int
    input_slot: int
    out1: int
    out2: int
    out1_is_leaf: bool


@dataclass(frozen=True)
class GateNode:
    """A node of the gate tree.  Leaves carry ``slot``; inner nodes ``children``."""

    id: int
    kind: str  # "LEAF", "NOT", "AND"
    children: Tuple[int, ...]
    slot: Optional[int] = None
    variable: Optional[int] = None
    level: int = 0  # post-order index of gates; leaves are 0
    x: float = 0.0  # mean slot of the leaves below


@dataclass
class PlanarCircuit:
    num_vars: int
    leaf_variables: List[int]  # variable of each leaf slot, left to right
    copies: Dict[int, List[int]]  # variable -> ordered leaf slots
    fanouts: List[FanoutGate]
    crossings: List[Tuple[int, int]]  # (X-wire slot column, fanout band row)
    nodes: List[GateNode]
    output: int

    def node(self, i: int) -> GateNode:
        return self.nodes[i]

    def gate_count(self) -> Dict[str, int]:
        out = {"NOT": 0, "AND": 0, "LEAF": 0}
        for n in self.nodes:
            out[n.kind] += 1
        return out


def to_planar_circuit(f: Formula) -> PlanarCircuit:
    """Fan-out layer below a crossing-free gate tree.

    Leaves are numbered by left-to-right AST order, so the tree above the
    fan-out layer is drawn without crossings.  Each variable with k > 1
    occurrences gets a chain of k - 1 two-output fan-outs; fan-out j peels
    off the rightmost remaining copy and passes the rest to the left.
    """
    if has_or(f.root):
        raise ValueError("eliminate OR before building the planar circuit")
    nodes: List[GateNode] = []
    leaves: List[int] = []
    level = 0

    def build(node: Node) -> int:
        nonlocal level
        if isinstance(node, Var):
            slot = len(leaves)
            leaves.append(node.index)
            nodes.append(GateNode(len(nodes), "LEAF", (), slot=slot, variable=node.index, x=float(slot)))
            return len(nodes) - 1
        if isinstance(node, Not):
            c = build(node.child)
            level += 1
            nodes.append(GateNode(len(nodes), "NOT", (c,), level=level, x=nodes[c].x))
            return len(nodes) - 1
        a = build(node.left)
        b = build(node.right)
        level += 1
        nodes.append(GateNode(len(nodes), "AND", (a, b), level=level, x=(nodes[a].x + nodes[b].x) / 2))
        return len(nodes) - 1

    out = build(f.root)
    copies: Dict[int, List[int]] = {}
    for slot, v in enumerate(leaves):
        copies.setdefault(v, []).append(slot)

    fanouts: List[FanoutGate] = []
    band = 0
    for v in sorted(copies):
        slots = copies[v]
        k = len(slots)
        for j in range(1, k):
            out2 = slots[k - j]
            src = slots[k - j]
            nxt = slots[k - j - 1]
            fanouts.append(FanoutGate(v, band, src, nxt, out2, out1_is_leaf=(j == k - 1)))
            band += 1

    crossings: List[Tuple[int, int]] = []
    for fo in fanouts:
        tied = {fo.out1, fo.out2}
        for slot in range(len(leaves)):
            if slot < fo.out2 and slot not in tied:
                crossings.append((slot, fo.band))
    return PlanarCircuit(f.num_vars, leaves, copies, fanouts, crossings, nodes, out)


def simulate(circuit: PlanarCircuit, assignment: Sequence[bool]) -> bool:
    """Propagate values through the fan-out layer and then the gate tree."""
    if len(assignment) != circuit.num_vars:
        raise ValueError("assignment length mismatch")
    # fan-out layer: every copy of a variable receives its value
    slot_value: Dict[int, bool] = {}
    for v, slots in circuit.copies.items():
        carried = assignment[v - 1]
        chain = [fo for fo in circuit.fanouts if fo.variable == v]
        if not chain:
            slot_value[slots[0]] = carried
        for fo in chain:
            slot_value[fo.out2] = carried
            if fo.out1_is_leaf:
                slot_value[fo.out1] = carried
    values: Dict[int, bool] = {}
    for n in circuit.nodes:
        if n.kind == "LEAF":
            values[n.id] = slot_value[n.slot]
        elif n.kind == "NOT":
            values[n.id] = not values[n.children[0]]
        else:
            values[n.id] = values[n.children[0]] and values[n.children[1]]
    return values[circuit.output]
