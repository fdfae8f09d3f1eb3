"""Independent rational-grid membership oracle for zone operations.

Zones are compared against their defining set comprehensions on a lattice of
half-integer points.  Membership of a lattice point is evaluated directly
from the constraint semantics (pure numpy index arithmetic over a scaled
integer lattice), never through the DBM code paths under test.

Lattice convention: axis index k represents clock value k/2, so a constraint
x_i - x_j <= c becomes idx_i - idx_j <= 2c.  With raw constants bounded by
CMAX, every nonempty zone built from them has its minimal corner within
n*(CMAX+2) time units, so emptiness and inclusion witnesses always appear on
the lattice (asserted at runtime by the meta-checks below).
"""

from __future__ import annotations

import random
import zlib

import numpy as np

from rtamc.zones import INF, Zone

CMAX = 4


def base_units(n: int, cmax: int = CMAX) -> int:
    """Half-open comparison box edge, in time units."""
    return n * (cmax + 2)


def ext_units(n: int, cmax: int = CMAX) -> int:
    """Witness lattice edge: base box plus room for any off-box witness.

    Canonical bounds built from constants <= cmax are sums of at most n
    matrix entries, so a witness for a base-box point never needs a
    coordinate beyond base + n*(cmax+1) + 1.
    """
    return base_units(n, cmax) + n * (cmax + 1) + 1


def lattice_shape(n: int, units: int) -> tuple[int, ...]:
    return (2 * units + 1,) * n


def crop_to_base(arr: np.ndarray, n: int, cmax: int = CMAX) -> np.ndarray:
    size = 2 * base_units(n, cmax) + 1
    return arr[(slice(0, size),) * n]


def matrix_members(rows, n: int, units: int) -> np.ndarray:
    """Boolean lattice of points satisfying every finite bound of ``rows``.

    ``rows`` is any (n+1)x(n+1) matrix; entries >= INF or float inf mean
    unbounded.  This is the independent evaluator: plain comparisons on the
    scaled lattice (axis index k encodes clock value k/2).
    """
    shape = lattice_shape(n, units)
    idx = list(np.indices(shape, dtype=np.int64))
    ext = [np.zeros(shape, dtype=np.int64)] + idx
    mask = np.ones(shape, dtype=bool)
    for i in range(n + 1):
        for j in range(n + 1):
            b = rows[i][j]
            if isinstance(b, float):
                if b == float("inf"):
                    continue
                b = int(b)
            if b >= INF:
                continue
            mask &= ext[i] - ext[j] <= 2 * int(b)
    return mask


def zone_members(z: Zone, units: int) -> np.ndarray:
    if z.matrix is None:
        return np.zeros(lattice_shape(z.dim, units), dtype=bool)
    return matrix_members(z.matrix.tolist(), z.dim, units)


def shift_down_any(members: np.ndarray) -> np.ndarray:
    """OR over uniform diagonal shifts: result[p] = any_k members[p - k*1]."""
    n = members.ndim
    size = members.shape[0]
    acc = np.zeros_like(members)
    for k in range(size):
        dst = (slice(k, None),) * n
        src = (slice(0, size - k),) * n
        acc[dst] |= members[src]
    return acc


def shift_up_any(members: np.ndarray) -> np.ndarray:
    """OR over uniform diagonal shifts: result[p] = any_k members[p + k*1]."""
    n = members.ndim
    size = members.shape[0]
    acc = np.zeros_like(members)
    for k in range(size):
        dst = (slice(0, size - k),) * n
        src = (slice(k, None),) * n
        acc[dst] |= members[src]
    return acc


def reset_image(members: np.ndarray, clocks: list[int]) -> np.ndarray:
    """Forward image of the lattice member set under resetting ``clocks`` (1-based)."""
    axes = tuple(c - 1 for c in clocks)
    red = members.any(axis=axes, keepdims=True)
    out = np.zeros_like(members)
    sel: list[slice | int] = [slice(None)] * members.ndim
    for a in axes:
        sel[a] = slice(0, 1)
    out[tuple(sel)] = red
    return out


def free_image(members: np.ndarray, clock: int) -> np.ndarray:
    ax = clock - 1
    red = members.any(axis=ax, keepdims=True)
    return np.broadcast_to(red, members.shape).copy()


def constraint_mask(i: int, j: int, c: int, n: int, units: int) -> np.ndarray:
    shape = lattice_shape(n, units)
    idx = list(np.indices(shape, dtype=np.int64))
    ext = [np.zeros(shape, dtype=np.int64)] + idx
    return ext[i] - ext[j] <= 2 * c


def closed_fw(rows: list[list[float]]) -> list[list[float]] | None:
    """Reference all-pairs closure on a float matrix (inf for unbounded).

    Returns None when inconsistent.  Kept deliberately naive and separate
    from the production code.
    """
    n = len(rows)
    m = [[float(v) for v in row] for row in rows]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                via = m[i][k] + m[k][j]
                if via < m[i][j]:
                    m[i][j] = via
    for i in range(n):
        if m[i][i] < 0:
            return None
    return m


# ---------------------------------------------------------------------------
# random case generation
# ---------------------------------------------------------------------------

def random_raw(rng: random.Random, n: int, cmax: int = CMAX, p_inf: float = 0.45):
    rows = [[0] * (n + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        for j in range(n + 1):
            if i == j:
                rows[i][j] = 0
            elif rng.random() < p_inf:
                rows[i][j] = INF
            else:
                rows[i][j] = rng.randint(-cmax, cmax)
    return rows


def random_zone(rng: random.Random, n: int, cmax: int = CMAX) -> Zone:
    return Zone.from_raw(random_raw(rng, n, cmax))


def random_nonempty_zone(rng: random.Random, n: int, cmax: int = CMAX) -> Zone:
    while True:
        z = random_zone(rng, n, cmax)
        if not z.is_empty:
            return z


def random_constraint(rng: random.Random, n: int, cmax: int = CMAX):
    while True:
        i = rng.randrange(n + 1)
        j = rng.randrange(n + 1)
        if i != j:
            return i, j, rng.randint(-cmax, cmax)


# ---------------------------------------------------------------------------
# per-operation oracle checks; each returns the number of point comparisons
# ---------------------------------------------------------------------------

class OracleFailure(AssertionError):
    pass


def _compare(expected: np.ndarray, actual: np.ndarray, what: str) -> int:
    if not np.array_equal(expected, actual):
        bad = int(np.sum(expected != actual))
        raise OracleFailure(f"{what}: {bad} lattice points disagree")
    return int(expected.size)


def check_canonicalize(rng: random.Random, n: int) -> int:
    raw = random_raw(rng, n)
    z = Zone.from_raw(raw)
    u = ext_units(n)
    return _compare(matrix_members(raw, n, u), zone_members(z, u), "canonicalize")


def check_is_empty(rng: random.Random, n: int) -> int:
    z = random_zone(rng, n)
    members = zone_members(z, ext_units(n))
    grid_empty = not members.any()
    if z.is_empty != grid_empty:
        raise OracleFailure("is_empty disagrees with grid member search")
    return int(members.size)


def check_contains(rng: random.Random, n: int) -> int:
    z = random_zone(rng, n)
    u = ext_units(n)
    members = zone_members(z, u)
    checks = 0
    size = 2 * u + 1
    for _ in range(64):
        idx = tuple(rng.randrange(size) for _ in range(n))
        point = [k / 2 for k in idx]
        if z.contains(point) != bool(members[idx]):
            raise OracleFailure(f"contains disagrees at {point}")
        checks += 1
    return checks


def check_includes(rng: random.Random, n: int) -> int:
    a = random_zone(rng, n)
    b = random_zone(rng, n)
    u = ext_units(n)
    ma, mb = zone_members(a, u), zone_members(b, u)
    grid_incl = bool((~mb | ma).all())
    if a.includes(b) != grid_incl:
        raise OracleFailure("includes disagrees with grid subset check")
    return int(ma.size)


def check_intersect_constraint(rng: random.Random, n: int) -> int:
    z = random_zone(rng, n)
    i, j, c = random_constraint(rng, n)
    res = z.constrained(i, j, c)
    u = ext_units(n)
    expected = zone_members(z, u) & constraint_mask(i, j, c, n, u)
    return _compare(expected, zone_members(res, u), "intersect_constraint")


def check_up(rng: random.Random, n: int) -> int:
    z = random_nonempty_zone(rng, n)
    u = ext_units(n)
    expected = shift_down_any(zone_members(z, u))
    return _compare(expected, zone_members(z.up(), u), "up")


def check_down(rng: random.Random, n: int) -> int:
    z = random_nonempty_zone(rng, n)
    u = ext_units(n)
    expected = crop_to_base(shift_up_any(zone_members(z, u)), n)
    return _compare(expected, crop_to_base(zone_members(z.down(), u), n), "down")


def check_reset(rng: random.Random, n: int) -> int:
    z = random_nonempty_zone(rng, n)
    clocks = sorted(rng.sample(range(1, n + 1), rng.randint(1, n)))
    u = ext_units(n)
    expected = crop_to_base(reset_image(zone_members(z, u), clocks), n)
    return _compare(expected, crop_to_base(zone_members(z.reset(clocks), u), n), "reset")


def check_free(rng: random.Random, n: int) -> int:
    z = random_nonempty_zone(rng, n)
    x = rng.randint(1, n)
    u = ext_units(n)
    expected = crop_to_base(free_image(zone_members(z, u), x), n)
    return _compare(expected, crop_to_base(zone_members(z.free(x), u), n), "free")


def check_extrapolate(rng: random.Random, n: int) -> int:
    z = random_nonempty_zone(rng, n)
    caps = [0] + [rng.randint(0, CMAX) for _ in range(n)]
    res = z.extrapolated(caps)
    u = ext_units(n)
    # widening only grows the zone
    members, wide = zone_members(z, u), zone_members(res, u)
    if (members & ~wide).any():
        raise OracleFailure("extrapolated zone lost a point")
    if not res.includes(z):
        raise OracleFailure("extrapolated zone fails includes(original)")
    # reference recomputation: apply the widening rule, then a naive closure
    assert z.matrix is not None
    ref = [[float(v) if v < INF else float("inf") for v in row] for row in z.matrix]
    for i in range(n + 1):
        for j in range(n + 1):
            if i >= 1 and ref[i][j] != float("inf") and ref[i][j] > caps[i]:
                ref[i][j] = float("inf")
            elif j >= 1 and ref[i][j] < -caps[j]:
                ref[i][j] = float(-caps[j])
    closed = closed_fw(ref)
    if closed is None:
        raise OracleFailure("reference widening became inconsistent")
    return _compare(matrix_members(closed, n, u), wide, "extrapolate")


OPERATION_CHECKS = {
    "canonicalize": check_canonicalize,
    "is_empty": check_is_empty,
    "contains": check_contains,
    "includes": check_includes,
    "intersect_constraint": check_intersect_constraint,
    "up": check_up,
    "down": check_down,
    "reset": check_reset,
    "free": check_free,
    "extrapolate": check_extrapolate,
}


def run_operation_oracle(op: str, cases: int, seed: int = 0) -> int:
    """Run ``cases`` random cases for one operation; returns total point checks."""
    rng = random.Random((seed << 8) ^ zlib.crc32(op.encode()))
    check = OPERATION_CHECKS[op]
    total = 0
    for k in range(cases):
        n = rng.choice((1, 2, 2, 3))
        total += check(rng, n)
    return total
