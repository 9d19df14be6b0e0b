"""Bimatrix stage games: Lemke-Howson, support enumeration and checks.

The row player (ego) receives ``A[i, j]`` and the column player (adversary)
``B[i, j]`` when ego plays ``i`` and the adversary plays ``j``.  Labels are
numbered ``1..m`` for ego actions and ``m+1..m+n`` for adversary actions.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

SUPPORT_ENUM_MAX_DIM = 6


class LemkeHowsonError(RuntimeError):
    """Pivoting did not terminate within the budget."""


@dataclass(frozen=True)
class StageGame:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float)
        if A.ndim != 2 or A.shape != B.shape or min(A.shape) < 1:
            raise ValueError(f"payoff matrices must share a shape (m, n) with m, n >= 1; "
                             f"got {A.shape} and {B.shape}")
        if not (np.isfinite(A).all() and np.isfinite(B).all()):
            raise ValueError("payoff matrices must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def shape(self):
        return self.A.shape


@dataclass(frozen=True)
class NashProfile:
    x: np.ndarray
    y: np.ndarray

    def as_tuple(self):
        return tuple(self.x) + tuple(self.y)


def _normalize(v: np.ndarray) -> np.ndarray:
    v = np.where(v < 0.0, 0.0, v)
    total = v.sum()
    if not total > 0.0:
        raise LemkeHowsonError("degenerate terminal basis (zero strategy mass)")
    v = v / total
    # sum to one within 1e-12 after division
    return v / v.sum()


def _pivot(tab: np.ndarray, basis: list, entering: int, lex_cols: range) -> int:
    """Pivot ``entering`` into ``tab`` using a lexicographic minimum ratio test."""
    col = tab[:, entering]
    rows = [r for r in range(tab.shape[0]) if col[r] > 1e-12]
    if not rows:
        raise LemkeHowsonError("unbounded ray; payoffs must be positive")
    if len(rows) > 1:
        for c in itertools.chain((tab.shape[1] - 1,), lex_cols):
            ratios = [tab[r, c] / col[r] for r in rows]
            best = min(ratios)
            slack = 1e-9 * max(1.0, abs(best))
            rows = [r for r, q in zip(rows, ratios) if q <= best + slack]
            if len(rows) == 1:
                break
    r = rows[0]
    piv = tab[r] / col[r]
    tab -= np.outer(col, piv)
    tab[r] = piv
    leaving = basis[r]
    basis[r] = entering
    return leaving


def lemke_howson(g: StageGame, dropped_label: int = 1, max_pivots: int = None) -> NashProfile:
    """One Nash equilibrium of ``g`` by complementary pivoting.

    Both matrices are shifted by ``1 - min(A, B)`` so every payoff is at least
    one; this leaves the equilibria unchanged and makes both best-response
    polytopes bounded.
    """
    A, B = g.A, g.B
    m, n = A.shape
    if not 1 <= dropped_label <= m + n:
        raise ValueError(f"dropped_label must be in 1..{m + n}, got {dropped_label}")
    if m == 1 and n == 1:
        return NashProfile(np.ones(1), np.ones(1))
    shift = 1.0 - min(A.min(), B.min())
    # columns are indexed by label (0-based), last column is the right-hand side
    # ego polytope {x >= 0 : B'^T x <= 1}; x_i carries label i, slack j label m+j
    row_tab = np.hstack([B.T + shift, np.eye(n), np.ones((n, 1))])
    row_basis = list(range(m, m + n))
    # adversary polytope {y >= 0 : A' y <= 1}; slack i carries label i, y_j label m+j
    col_tab = np.hstack([np.eye(m), A + shift, np.ones((m, 1))])
    col_basis = list(range(m))
    # reversed lexicographic column order: symmetric ties resolve to low indices
    tabs = ((row_tab, row_basis, range(m + n - 1, m - 1, -1)),
            (col_tab, col_basis, range(m - 1, -1, -1)))

    if max_pivots is None:
        max_pivots = 10 * math.comb(m + n, m)
    k = dropped_label - 1
    side = 0 if k < m else 1
    entering = k
    for _ in range(max_pivots):
        tab, basis, lex_cols = tabs[side]
        leaving = _pivot(tab, basis, entering, lex_cols)
        if leaving == k:
            break
        side = 1 - side
        entering = leaving
    else:
        raise LemkeHowsonError(f"no equilibrium after {max_pivots} pivots")

    x = np.zeros(m)
    for r, lab in enumerate(row_basis):
        if lab < m:
            x[lab] = row_tab[r, -1]
    y = np.zeros(n)
    for r, lab in enumerate(col_basis):
        if lab >= m:
            y[lab - m] = col_tab[r, -1]
    return NashProfile(_normalize(x), _normalize(y))


def support_enumeration(g: StageGame, tol: float = 1e-9) -> list:
    """All equilibria with equal-size supports, found by solving indifference."""
    A, B = g.A, g.B
    m, n = A.shape
    if m > SUPPORT_ENUM_MAX_DIM or n > SUPPORT_ENUM_MAX_DIM:
        raise ValueError(f"support enumeration is limited to {SUPPORT_ENUM_MAX_DIM}x"
                         f"{SUPPORT_ENUM_MAX_DIM} games, got {m}x{n}")
    scale = 1.0 + max(np.abs(A).max(), np.abs(B).max())
    found = []
    for k in range(1, min(m, n) + 1):
        for I in itertools.combinations(range(m), k):
            for J in itertools.combinations(range(n), k):
                yJ = _indifferent(A[np.ix_(I, J)])
                xI = _indifferent(B[np.ix_(I, J)].T)
                if yJ is None or xI is None:
                    continue
                if (yJ < -tol).any() or (xI < -tol).any():
                    continue
                x = np.zeros(m)
                x[list(I)] = np.clip(xI, 0.0, None)
                y = np.zeros(n)
                y[list(J)] = np.clip(yJ, 0.0, None)
                x /= x.sum()
                y /= y.sum()
                p = NashProfile(x, y)
                if not is_epsilon_nash(g, p, tol * scale):
                    continue
                if any(np.abs(q.x - x).max() < 1e-9 and np.abs(q.y - y).max() < 1e-9
                       for q in found):
                    continue
                found.append(p)
    return found


def _indifferent(M: np.ndarray):
    """Mixed strategy over columns of ``M`` making every row's payoff equal."""
    k = M.shape[0]
    system = np.zeros((k + 1, k + 1))
    system[:k, :k] = M
    system[:k, k] = -1.0
    system[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.isfinite(sol).all() or np.abs(system @ sol - rhs).max() > 1e-9:
        return None
    return sol[:k]


def is_epsilon_nash(g: StageGame, p: NashProfile, eps: float) -> bool:
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    Ay = g.A @ p.y
    xB = p.x @ g.B
    return bool(p.x @ Ay >= Ay.max() - eps and xB @ p.y >= xB.max() - eps)


def nash_value(M, p: NashProfile) -> float:
    M = np.asarray(M, dtype=float)
    if M.shape != (len(p.x), len(p.y)):
        raise ValueError(f"matrix shape {M.shape} does not match profile "
                         f"({len(p.x)}, {len(p.y)})")
    return float(p.x @ M @ p.y)


def solve_stage_game(g: StageGame) -> NashProfile:
    """The equilibrium used for learning: Lemke-Howson from label 1.

    Falls back to the lexicographically smallest support-enumeration
    equilibrium when pivoting fails.
    """
    try:
        return lemke_howson(g, 1)
    except LemkeHowsonError:
        candidates = support_enumeration(g)
        if not candidates:
            raise
        return min(candidates, key=NashProfile.as_tuple)


class PointKind(enum.Enum):
    GLOBAL_OPTIMUM = "GlobalOptimum"
    SADDLE_POINT = "SaddlePoint"
    NEITHER = "Neither"


def classify_point(g: StageGame, p: NashProfile, tol: float = 1e-9) -> PointKind:
    """Whether ``p`` is a global optimum, a saddle point, or neither.

    Deviations are checked over pure strategies only, which suffices because
    expected payoffs are bilinear.
    """
    A, B, x, y = g.A, g.B, p.x, p.y
    tol = tol * (1.0 + max(np.abs(A).max(), np.abs(B).max()))
    va, vb = x @ A @ y, x @ B @ y
    if va >= A.max() - tol and vb >= B.max() - tol:
        return PointKind.GLOBAL_OPTIMUM
    Ay, xA = A @ y, x @ A
    By, xB = B @ y, x @ B
    ego_ok = (Ay <= va + tol).all() and (xA >= va - tol).all()
    adv_ok = (xB <= vb + tol).all() and (By >= vb - tol).all()
    if ego_ok and adv_ok:
        return PointKind.SADDLE_POINT
    return PointKind.NEITHER


def parse_matrix_game(text: str) -> StageGame:
    """``m n`` on the first line, then ``m`` rows of A and ``m`` rows of B."""
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("expected 'm n' header")
    try:
        m, n = int(tokens[0]), int(tokens[1])
    except ValueError:
        raise ValueError("header must be two integers 'm n'") from None
    if m < 1 or n < 1:
        raise ValueError(f"bad dimensions {m}x{n}")
    values = tokens[2:]
    if len(values) != 2 * m * n:
        raise ValueError(f"expected {2 * m * n} payoffs for a {m}x{n} game, got {len(values)}")
    try:
        nums = np.array([float(v) for v in values])
    except ValueError as exc:
        raise ValueError(f"bad payoff: {exc}") from None
    return StageGame(nums[: m * n].reshape(m, n), nums[m * n:].reshape(m, n))
