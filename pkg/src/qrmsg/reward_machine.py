"""Reward machines: deterministic Mealy machines over sets of propositions.

A machine reads one label (the set of propositions true at a step) per step
and emits a scalar reward.  Label sets that match no explicit edge take a
self-loop with reward 0, so ``step`` is total.

Text format::

    # comment
    states: v0 v1 v2 vend
    initial: v0
    props: EgoAtHome AdvAtHome EgoMeetAdv EgoAtAdvHome
    edge: v0 -> v1 on EgoAtHome & !AdvAtHome reward 0

Guard grammar: atom | "!" guard | guard "&" guard | guard "|" guard |
"(" guard ")" | "true", with precedence ! > & > |.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import InitVar, dataclass, field
from typing import Iterable, Optional, Sequence

Label = frozenset  # frozenset[str]

# label-table precomputation is exponential in |P|
MAX_TABULATED_PROPS = 12


class RMError(ValueError):
    """Raised for malformed or invalid reward machines."""


class RMSyntaxError(RMError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DeterminismError(RMError):
    def __init__(self, state: str, label: frozenset, edges: Sequence["Edge"]):
        shown = "{" + ", ".join(sorted(label)) + "}"
        targets = ", ".join(f"{e.source} -> {e.target} on {e.guard}" for e in edges)
        super().__init__(
            f"nondeterministic at state {state!r} for label {shown}: {targets}")
        self.state = state
        self.label = label


# ---------------------------------------------------------------------------
# Guards

class Guard:
    prec = 4

    def holds(self, label: frozenset) -> bool:
        raise NotImplementedError

    def atoms(self) -> set:
        raise NotImplementedError

    def _wrap(self, parent_prec: int) -> str:
        text = str(self)
        return f"({text})" if self.prec < parent_prec else text


@dataclass(frozen=True)
class TrueGuard(Guard):
    def holds(self, label):
        return True

    def atoms(self):
        return set()

    def __str__(self):
        return "true"


@dataclass(frozen=True)
class Atom(Guard):
    name: str

    def holds(self, label):
        return self.name in label

    def atoms(self):
        return {self.name}

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Not(Guard):
    operand: Guard
    prec = 3

    def holds(self, label):
        return not self.operand.holds(label)

    def atoms(self):
        return self.operand.atoms()

    def __str__(self):
        return "!" + self.operand._wrap(self.prec)


@dataclass(frozen=True)
class And(Guard):
    left: Guard
    right: Guard
    prec = 2

    def holds(self, label):
        return self.left.holds(label) and self.right.holds(label)

    def atoms(self):
        return self.left.atoms() | self.right.atoms()

    def __str__(self):
        return f"{self.left._wrap(self.prec)} & {self.right._wrap(self.prec + 1)}"


@dataclass(frozen=True)
class Or(Guard):
    left: Guard
    right: Guard
    prec = 1

    def holds(self, label):
        return self.left.holds(label) or self.right.holds(label)

    def atoms(self):
        return self.left.atoms() | self.right.atoms()

    def __str__(self):
        return f"{self.left._wrap(self.prec)} | {self.right._wrap(self.prec + 1)}"


_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[!&|()]))")


def _tokenize(text: str, line: int, col0: int):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = len(text) - len(text[pos:].lstrip())
            raise RMSyntaxError(f"unexpected character {text[bad]!r} in guard",
                                line, col0 + bad + 1)
        kind = "ident" if m.group("ident") else "op"
        value = m.group(kind)
        tokens.append((kind, value, col0 + m.start(kind) + 1))
        pos = m.end()
    return tokens


class _GuardParser:
    def __init__(self, text: str, line: int = 1, col0: int = 0):
        self.tokens = _tokenize(text, line, col0)
        self.i = 0
        self.line = line
        self.end_col = col0 + len(text) + 1

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _error(self, msg, tok=None):
        col = tok[2] if tok else self.end_col
        raise RMSyntaxError(msg, self.line, col)

    def parse(self) -> Guard:
        if not self.tokens:
            self._error("empty guard")
        g = self._or()
        tok = self._peek()
        if tok is not None:
            self._error(f"unexpected token {tok[1]!r}", tok)
        return g

    def _or(self):
        g = self._and()
        while (tok := self._peek()) is not None and tok[1] == "|":
            self.i += 1
            g = Or(g, self._and())
        return g

    def _and(self):
        g = self._unary()
        while (tok := self._peek()) is not None and tok[1] == "&":
            self.i += 1
            g = And(g, self._unary())
        return g

    def _unary(self):
        tok = self._peek()
        if tok is None:
            self._error("guard ends unexpectedly")
        kind, value, _ = tok
        if value == "!":
            self.i += 1
            return Not(self._unary())
        if value == "(":
            self.i += 1
            g = self._or()
            close = self._peek()
            if close is None or close[1] != ")":
                self._error("expected ')'", close)
            self.i += 1
            return g
        if kind == "ident":
            self.i += 1
            return TrueGuard() if value == "true" else Atom(value)
        self._error(f"unexpected token {value!r}", tok)


def parse_guard(text: str) -> Guard:
    return _GuardParser(text).parse()


# ---------------------------------------------------------------------------
# Machines

@dataclass(frozen=True)
class Edge:
    source: str
    guard: Guard
    target: str
    reward: float


def all_labels(props: Iterable[str]):
    """Every subset of ``props`` as a frozenset, smallest first."""
    props = sorted(props)
    for k in range(len(props) + 1):
        for combo in itertools.combinations(props, k):
            yield frozenset(combo)


@dataclass(frozen=True)
class RewardMachine:
    states: tuple
    initial: str
    props: frozenset
    edges: tuple = ()
    name: str = ""
    check: InitVar[bool] = True
    _table: Optional[dict] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self, check: bool = True):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "props", frozenset(self.props))
        object.__setattr__(self, "edges", tuple(self.edges))
        if not self.states:
            raise RMError("a reward machine needs at least one state")
        if len(set(self.states)) != len(self.states):
            raise RMError("duplicate state names")
        if self.initial not in self.states:
            raise RMError(f"initial state {self.initial!r} is not a declared state")
        known = set(self.states)
        for e in self.edges:
            for v in (e.source, e.target):
                if v not in known:
                    raise RMError(f"edge refers to unknown state {v!r}")
            unknown = e.guard.atoms() - self.props
            if unknown:
                raise RMError(f"unknown proposition(s) {sorted(unknown)} in edge "
                              f"{e.source} -> {e.target}")
        if not check:
            # unchecked machines take the first matching edge; used to inspect
            # nondeterministic input with check_deterministic
            return
        if len(self.props) <= MAX_TABULATED_PROPS:
            table = {}
            for v in self.states:
                out = [e for e in self.edges if e.source == v]
                for label in all_labels(self.props):
                    hits = [e for e in out if e.guard.holds(label)]
                    if len(hits) > 1:
                        raise DeterminismError(v, label, hits)
                    table[v, label] = (hits[0].target, hits[0].reward) if hits else (v, 0.0)
            object.__setattr__(self, "_table", table)
        else:
            witness = check_deterministic(self)
            if witness is not None:
                raise DeterminismError(*witness)

    def step(self, v: str, label: frozenset):
        """Return ``(next_state, reward)`` for reading ``label`` in state ``v``."""
        label = label & self.props
        if self._table is not None:
            return self._table[v, label]
        for e in self.edges:
            if e.source == v and e.guard.holds(label):
                return e.target, e.reward
        return v, 0.0

    def run(self, labels: Sequence[frozenset]) -> list:
        v = self.initial
        rewards = []
        for label in labels:
            v, r = self.step(v, label)
            rewards.append(r)
        return rewards

    def is_sink(self, v: str) -> bool:
        """True when no explicit edge can move the machine out of ``v``."""
        return all(e.target == v for e in self.edges if e.source == v)

    def to_text(self) -> str:
        lines = []
        if self.name:
            lines.append(f"# {self.name}")
        lines.append("states: " + " ".join(self.states))
        lines.append(f"initial: {self.initial}")
        lines.append("props: " + " ".join(sorted(self.props)))
        for e in self.edges:
            lines.append(f"edge: {e.source} -> {e.target} on {e.guard} reward {e.reward!r}")
        return "\n".join(lines) + "\n"


def rm_step(rm: RewardMachine, v: str, label: Iterable[str]):
    return rm.step(v, frozenset(label))


def rm_run(rm: RewardMachine, labels: Sequence[Iterable[str]]) -> list:
    return rm.run([frozenset(l) for l in labels])


def check_deterministic(rm: RewardMachine):
    """Exhaustively look for a (state, label) pair enabling two edges.

    Returns ``None`` when deterministic, else ``(state, label, edges)``.
    """
    for v in rm.states:
        out = [e for e in rm.edges if e.source == v]
        for label in all_labels(rm.props):
            hits = [e for e in out if e.guard.holds(label)]
            if len(hits) > 1:
                return v, label, hits
    return None


_EDGE = re.compile(
    r"^(?P<src>\S+)\s*->\s*(?P<dst>\S+)\s+on\s+(?P<guard>.+?)\s+reward\s+(?P<reward>\S+)\s*$")


def parse_rm(text: str, name: str = "") -> RewardMachine:
    states = initial = props = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        key, sep, rest = line.strip().partition(":")
        if not sep:
            raise RMSyntaxError("expected 'key: value'", lineno, indent + 1)
        key = key.strip()
        # 0-based offset of the first character after "key:" and its blanks
        body_col = line.index(":") + 1 + (len(rest) - len(rest.lstrip()))
        rest = rest.strip()
        if key == "states":
            states = rest.split()
        elif key == "initial":
            initial = rest
        elif key == "props":
            props = rest.split()
        elif key == "edge":
            m = _EDGE.match(rest)
            if m is None:
                raise RMSyntaxError("expected 'SRC -> DST on GUARD reward R'", lineno, body_col + 1)
            guard = _GuardParser(m.group("guard"), lineno, body_col + m.start("guard")).parse()
            try:
                reward = float(m.group("reward"))
            except ValueError:
                raise RMSyntaxError(f"bad reward {m.group('reward')!r}", lineno,
                                    body_col + m.start("reward") + 1) from None
            edges.append(Edge(m.group("src"), guard, m.group("dst"), reward))
        else:
            raise RMSyntaxError(f"unknown key {key!r}", lineno, indent + 1)
    if states is None:
        raise RMError("missing 'states:' line")
    if initial is None:
        raise RMError("missing 'initial:' line")
    if props is None:
        props = []
    if len(set(props)) != len(props):
        raise RMError("duplicate propositions")
    return RewardMachine(tuple(states), initial, frozenset(props), tuple(edges), name=name)


def load_rm(path) -> RewardMachine:
    from pathlib import Path
    path = Path(path)
    return parse_rm(path.read_text(encoding="utf-8"), name=path.stem)
