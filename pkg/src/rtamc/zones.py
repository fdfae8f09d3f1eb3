"""Clock zones as difference bound matrices (DBMs).

A zone over n clocks is the set of valuations v in R^n, v >= 0, satisfying
v_i - v_j <= m[i][j] for all i, j, where index 0 is the reference clock
(v_0 == 0).  All bounds are non-strict: the matrix entry is either an
integer or +infinity, never "< c".  Consequently every zone is a closed
set, canonical forms are unique, and the minimal point of a nonempty zone
(v_i = -m[0][i]) always belongs to it.

Matrices are kept in canonical (all-pairs tightest) form at all times;
the empty zone is a distinguished value with no matrix.  Zone objects are
immutable and hashable.

Internally entries live in numpy int64 arrays.  +infinity is the sentinel
``INF``; arithmetic saturates back to ``INF`` above ``_SAT``, so finite
bounds may not exceed ``MAX_BOUND`` (plenty for millisecond models).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

INF: int = 1 << 60
_SAT: int = 1 << 59
MAX_BOUND: int = 1 << 40

__all__ = ["INF", "MAX_BOUND", "Zone"]


# ---------------------------------------------------------------------------
# raw matrix kernels (operate in place on writable int64 arrays)
# ---------------------------------------------------------------------------

def _saturate(m: np.ndarray) -> None:
    m[m > _SAT] = INF


def _close(m: np.ndarray) -> bool:
    """Floyd-Warshall closure in place. Returns False iff inconsistent."""
    n = m.shape[0]
    for k in range(n):
        np.minimum(m, m[:, k, None] + m[None, k, :], out=m)
    _saturate(m)
    return bool((np.diagonal(m) >= 0).all())


def _constrain(m: np.ndarray, i: int, j: int, c: int) -> bool:
    """Intersect a canonical matrix with x_i - x_j <= c, keeping it canonical.

    Returns False iff the result is empty.
    """
    if c >= m[i, j]:
        return True
    if c + m[j, i] < 0:
        return False
    np.minimum(m, (m[:, i] + c)[:, None] + m[j, :][None, :], out=m)
    _saturate(m)
    return True


def _up(m: np.ndarray) -> None:
    """Delay closure (future): drop upper bounds. Preserves canonical form."""
    m[1:, 0] = INF


def _down(m: np.ndarray) -> None:
    """Past closure: relax lower bounds, exact for canonical input."""
    # Shortest path 0 -> j after setting all row-0 weights to 0 reduces to the
    # column minimum over the untouched rows (the j==k term contributes 0).
    m[0, 1:] = np.minimum(0, m[1:, 1:].min(axis=0))


def _reset(m: np.ndarray, clocks: Iterable[int]) -> None:
    """Reset the given clocks to zero. Preserves canonical form."""
    for x in clocks:
        m[x, :] = m[0, :]
        m[:, x] = m[:, 0]


def _free(m: np.ndarray, x: int) -> None:
    """Forget clock x (any value >= 0). Preserves canonical form."""
    m[x, :] = INF
    m[:, x] = m[:, 0]
    m[x, x] = 0


def _extrapolate(m: np.ndarray, maxconst: np.ndarray) -> bool:
    """Classic maximal-constant widening in place.

    ``maxconst[i]`` is the largest constant clock i is compared against
    (index 0 unused).  Returns True iff anything changed; the caller must
    re-close when it did.
    """
    row_cap = maxconst.copy()
    row_cap[0] = INF  # row 0 holds lower bounds, never widened upward
    col_cap = maxconst.copy()
    col_cap[0] = INF
    finite = m < INF
    too_high = finite & (m > row_cap[:, None])
    too_low = m < -col_cap[None, :]
    if not (too_high.any() or too_low.any()):
        return False
    m[too_high] = INF
    np.copyto(m, np.broadcast_to(-col_cap[None, :], m.shape), where=too_low)
    return True


# ---------------------------------------------------------------------------
# public immutable zone
# ---------------------------------------------------------------------------

class Zone:
    """An immutable clock zone in canonical DBM form (or the empty zone)."""

    __slots__ = ("dim", "_m", "_key")

    def __init__(self, dim: int, m: np.ndarray | None):
        self.dim = dim
        if m is not None:
            m.flags.writeable = False
        self._m = m
        self._key = None

    @property
    def key(self):
        k = self._key
        if k is None:
            k = (self.dim, None if self._m is None else self._m.tobytes())
            self._key = k
        return k

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(dim: int) -> "Zone":
        """The single point with every clock equal to 0."""
        return Zone(dim, np.zeros((dim + 1, dim + 1), dtype=np.int64))

    @staticmethod
    def universe(dim: int) -> "Zone":
        """All valuations with nonnegative clocks."""
        m = np.full((dim + 1, dim + 1), INF, dtype=np.int64)
        m[0, :] = 0
        np.fill_diagonal(m, 0)
        return Zone(dim, m)

    @staticmethod
    def empty(dim: int) -> "Zone":
        return Zone(dim, None)

    @staticmethod
    def make(dim: int, kind: str) -> "Zone":
        if kind == "zero":
            return Zone.zero(dim)
        if kind == "universe":
            return Zone.universe(dim)
        raise ValueError(f"unknown zone kind: {kind!r}")

    @staticmethod
    def from_raw(rows: Sequence[Sequence[int | float]]) -> "Zone":
        """Canonicalize an arbitrary bound matrix (entry [i][j] is x_i - x_j <= c).

        Entries at or above ``INF`` (or float inf) mean "unbounded".  Clock
        nonnegativity is imposed on top of the given constraints.
        """
        n = len(rows) - 1
        m = np.empty((n + 1, n + 1), dtype=np.int64)
        for i, row in enumerate(rows):
            if len(row) != n + 1:
                raise ValueError("bound matrix must be square")
            for j, v in enumerate(row):
                if isinstance(v, float):
                    if v == float("inf"):
                        m[i, j] = INF
                    elif float(v).is_integer():
                        m[i, j] = int(v)
                    else:
                        raise ValueError("bounds must be integers or +inf")
                else:
                    m[i, j] = min(int(v), INF)
                if m[i, j] != INF and abs(m[i, j]) > MAX_BOUND:
                    raise ValueError("finite bound exceeds supported magnitude")
        m[0, :] = np.minimum(m[0, :], 0)  # clocks are nonnegative
        np.fill_diagonal(m, np.minimum(np.diagonal(m), 0))
        if not _close(m):
            return Zone(n, None)
        return Zone(n, m)

    # -- basic queries -------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return self._m is None

    def bound(self, i: int, j: int) -> int:
        """The bound on x_i - x_j (INF when unbounded). Undefined on empty zones."""
        assert self._m is not None
        return int(self._m[i, j])

    @property
    def matrix(self) -> np.ndarray | None:
        return self._m

    def contains(self, v: Sequence[int | float | Fraction]) -> bool:
        """Exact membership of a valuation (rationals welcome)."""
        if self._m is None:
            return False
        if len(v) != self.dim:
            raise ValueError("valuation has wrong dimension")
        ext = (0, *v)
        m = self._m
        for i in range(self.dim + 1):
            mi = m[i]
            for j in range(self.dim + 1):
                b = mi[j]
                if b < INF and ext[i] - ext[j] > b:
                    return False
        return True

    def includes(self, other: "Zone") -> bool:
        """True iff ``other`` is a subset of this zone (canonical entrywise test)."""
        if other._m is None:
            return True
        if self._m is None:
            return False
        return bool((other._m <= self._m).all())

    # -- algebra -------------------------------------------------------------

    def _copy(self) -> np.ndarray:
        assert self._m is not None
        out = self._m.copy()
        out.flags.writeable = True
        return out

    def constrained(self, i: int, j: int, c: int) -> "Zone":
        """Intersect with x_i - x_j <= c (index 0 is the reference clock)."""
        if self._m is None:
            return self
        if c >= self._m[i, j]:
            return self
        m = self._copy()
        if not _constrain(m, i, j, c):
            return Zone(self.dim, None)
        return Zone(self.dim, m)

    def intersect(self, other: "Zone") -> "Zone":
        if self._m is None or other._m is None:
            return Zone(self.dim, None)
        if self.includes(other):
            return other
        if other.includes(self):
            return self
        m = np.minimum(self._m, other._m)
        if not _close(m):
            return Zone(self.dim, None)
        return Zone(self.dim, m)

    def up(self) -> "Zone":
        """Delay closure {v + t | v in zone, t >= 0}."""
        if self._m is None:
            return self
        m = self._copy()
        _up(m)
        return Zone(self.dim, m)

    def down(self) -> "Zone":
        """Past closure {v >= 0 | exists t >= 0: v + t in zone}."""
        if self._m is None:
            return self
        m = self._copy()
        _down(m)
        return Zone(self.dim, m)

    def reset(self, clocks: Iterable[int]) -> "Zone":
        """Image under resetting the given clocks to zero."""
        if self._m is None:
            return self
        m = self._copy()
        _reset(m, clocks)
        return Zone(self.dim, m)

    def free(self, x: int) -> "Zone":
        """Image under assigning clock x an arbitrary nonnegative value."""
        if self._m is None:
            return self
        m = self._copy()
        _free(m, x)
        return Zone(self.dim, m)

    def extrapolated(self, maxconst: Sequence[int]) -> "Zone":
        """Maximal-constant widening; always a superset of this zone."""
        if self._m is None:
            return self
        caps = np.asarray(maxconst, dtype=np.int64)
        if caps.shape != (self.dim + 1,):
            raise ValueError("need one maximal constant per clock (index 0 unused)")
        m = self._copy()
        if not _extrapolate(m, caps):
            return self
        ok = _close(m)
        assert ok, "widening cannot empty a zone"
        return Zone(self.dim, m)

    # -- plumbing ------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Zone) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        if self._m is None:
            return f"Zone(dim={self.dim}, empty)"
        return f"Zone(dim={self.dim}, {self.pretty()})"

    def pretty(self, names: Sequence[str] | None = None) -> str:
        """Human-readable conjunction of the non-redundant constraints."""
        if self._m is None:
            return "false"
        n = self.dim
        label = list(names) if names is not None else [f"x{i}" for i in range(1, n + 1)]
        parts: list[str] = []
        m = self._m
        for i in range(n + 1):
            for j in range(n + 1):
                if i == j or m[i, j] >= INF:
                    continue
                if i == 0:
                    if m[0, j] == 0:
                        continue  # plain nonnegativity
                    parts.append(f"{label[j - 1]}>={-int(m[0, j])}")
                elif j == 0:
                    parts.append(f"{label[i - 1]}<={int(m[i, 0])}")
                else:
                    parts.append(f"{label[i - 1]}-{label[j - 1]}<={int(m[i, j])}")
        return " & ".join(parts) if parts else "true"
