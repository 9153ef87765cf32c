"""Independence, tameness, l1 constants and double-limit violations.

Everything here is the finite, desk-scale reading of notions that are defined
for infinite sequences: a family is called *tame at k* when no k of its
members form an independent subfamily, and a double-limit violation is a
k x k submatrix whose upper and lower triangles sit near two constants that
are at least ``delta`` apart.

Patterns are tuples of booleans aligned with the witnessed indices; ``True``
means the member must lie above ``b`` at the witness point and ``False`` that
it must lie below ``a``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .errors import (
    BadIndices,
    BadSize,
    BadThresholds,
    EmptyFamily,
    InvalidWitness,
    ToleranceNonPositive,
)
from .variation import FunctionFamily, variation


def pattern_label(pattern) -> str:
    """``(False, True)`` -> ``"PM"``: P marks below-a members, M above-b members."""
    return "".join("M" if up else "P" for up in pattern)


def parse_pattern(label: str) -> tuple:
    return tuple(ch == "M" for ch in label)


def all_patterns(k: int):
    return itertools.product((False, True), repeat=k)


@dataclass(frozen=True)
class IndependenceWitness:
    indices: tuple
    a: float
    b: float
    pattern_witnesses: dict = field(hash=False)

    def validate(self, family: FunctionFamily) -> bool:
        """Re-check every stored point against the raw values, strictly."""
        if not self.a < self.b:
            return False
        if set(self.pattern_witnesses) != set(all_patterns(len(self.indices))):
            return False
        for pattern, x in self.pattern_witnesses.items():
            for n, up in zip(self.indices, pattern):
                v = family[n].values[x]
                if up and not v > self.b:
                    return False
                if not up and not v < self.a:
                    return False
        return True

    def points_in_chain_order(self) -> list:
        return sorted(self.pattern_witnesses.values())


@dataclass(frozen=True)
class IndependenceRefusal:
    """No point realizes ``empty_pattern`` at the given thresholds."""

    indices: tuple
    a: float
    b: float
    empty_pattern: tuple

    def __bool__(self):
        return False


def _check_indices(family, indices):
    indices = tuple(int(i) for i in indices)
    if len(set(indices)) != len(indices):
        raise BadIndices(f"indices {indices} are not distinct")
    for i in indices:
        if not 0 <= i < len(family):
            raise BadIndices(f"index {i} outside 0..{len(family) - 1}")
    return indices


def _pattern_codes(vals: np.ndarray, a: float, b: float) -> np.ndarray:
    """Code of the full pattern each point realizes, or -1.

    A point realizes at most one full pattern: every member must be strictly
    below ``a`` or strictly above ``b`` there.  The code reads the pattern as
    a binary number with the first index as the most significant bit.
    """
    below = vals < a
    above = vals > b
    decided = np.all(below | above, axis=0)
    k = vals.shape[0]
    weights = 1 << np.arange(k - 1, -1, -1)
    codes = (above.astype(np.int64) * weights[:, None]).sum(axis=0)
    return np.where(decided, codes, -1)


def independence_at(family: FunctionFamily, indices, a: float, b: float):
    """Certify that the selected members are independent at thresholds ``a < b``.

    Only full patterns need checking: the region of a partial pattern contains
    the region of every full pattern extending it.
    """
    if not a < b:
        raise BadThresholds(f"need a < b, got a={a}, b={b}")
    indices = _check_indices(family, indices)
    if not indices:
        raise BadIndices("at least one index is required")
    vals = np.array([family[i].values for i in indices], dtype=float)
    codes = _pattern_codes(vals, a, b)
    k = len(indices)
    first = {}
    for x, code in enumerate(codes.tolist()):
        if code >= 0 and code not in first:
            first[code] = x
    witnesses = {}
    for pattern in all_patterns(k):
        code = int("".join("1" if up else "0" for up in pattern), 2)
        if code not in first:
            return IndependenceRefusal(indices, a, b, pattern)
        witnesses[pattern] = first[code]
    return IndependenceWitness(indices, float(a), float(b), witnesses)


def candidate_gaps(values) -> list:
    """Threshold pairs for every gap of the pooled values, in increasing order.

    Gap ``g`` is the open interval between the ``g-1``-th and ``g``-th distinct
    values (with one gap below the minimum and one above the maximum).  Each
    gap contributes the two trisection points of the interval, so ``a < b``
    can share a gap.
    """
    distinct = sorted(set(float(v) for v in values))
    bounds = [distinct[0] - 1.0] + distinct + [distinct[-1] + 1.0]
    out = []
    for lo, hi in zip(bounds, bounds[1:]):
        step = (hi - lo) / 3.0
        out.append((lo + step, lo + 2.0 * step))
    return out


def _first_feasible_gap(ranks: np.ndarray, n_gaps: int) -> Optional[int]:
    """Smallest gap index ``g`` with thresholds ``a < b`` both in gap ``g``
    realizing every full pattern; None when there is none.

    With ``a`` in gap ``ga``, ``f < a`` iff rank(f) < ga; with ``b`` in gap
    ``gb``, ``f > b`` iff rank(f) >= gb.  Taking ``gb == ga`` is the loosest
    choice compatible with ``a < b``, and also the lexicographically first.
    """
    k, n = ranks.shape
    m = n_gaps - 1
    pats = np.array(list(all_patterns(k)), dtype=bool)  # (2^k, k)
    r = ranks[None, :, :]
    up = pats[:, :, None]
    need_a_above = np.where(~up, r, -1).max(axis=1)  # ga must exceed this
    need_b_at_most = np.where(up, r, m).min(axis=1)  # gb must not exceed this
    gaps = np.arange(n_gaps)
    ok_a = need_a_above[:, :, None] < gaps[None, None, :]
    best_b = np.where(ok_a, need_b_at_most[:, :, None], -1).max(axis=1)
    worst = best_b.min(axis=0)
    hits = np.nonzero(worst >= gaps)[0]
    return int(hits[0]) if hits.size else None


def independence_search(family: FunctionFamily, k: int):
    """First independent ``k``-subfamily, searching subsets lexicographically.

    Thresholds come from :func:`candidate_gaps` over the pooled values of the
    whole family.  A None result certifies that no ``k``-subfamily is
    independent at any thresholds, since pattern regions only change when a
    threshold crosses a function value.
    """
    if not 1 <= k <= len(family):
        raise BadSize(f"k must lie in 1..{len(family)}, got {k}")
    rows = np.array(family.rows(), dtype=float)
    distinct = np.unique(rows)
    gaps = candidate_gaps(distinct.tolist())
    ranks = np.searchsorted(distinct, rows)
    for subset in itertools.combinations(range(len(family)), k):
        g = _first_feasible_gap(ranks[list(subset)], len(gaps))
        if g is None:
            continue
        a, b = gaps[g]
        found = independence_at(family, subset, a, b)
        if not found:
            raise AssertionError(f"rank search and direct check disagree on {subset}")
        return found
    return None


def max_independent_size(family: FunctionFamily) -> tuple:
    """Largest k with an independent k-subfamily, with its witness.

    Independence passes to subfamilies at the same thresholds, so the scan
    stops at the first failing size.
    """
    best = (0, None)
    for k in range(1, len(family) + 1):
        w = independence_search(family, k)
        if w is None:
            break
        best = (k, w)
    return best


def variation_budget(witness: IndependenceWitness, family: FunctionFamily) -> tuple:
    """``((2**k - 1) * (b - a), sum of member variations)`` for a witness.

    Consecutive witness points in chain order carry different patterns, so
    some member swings by more than ``b - a`` between them; the first number
    therefore never exceeds the second.
    """
    k = len(witness.indices)
    need = (2**k - 1) * (witness.b - witness.a)
    have = sum(variation(family[i]) for i in witness.indices)
    return need, have


@dataclass(frozen=True)
class L1Certificate:
    constant: float
    minimizing_coefficients: tuple
    tolerance: float
    method: str = "lp"
    error_bound: float = 0.0


def sup_norm_of_combination(rows: np.ndarray, coeffs) -> float:
    return float(np.max(np.abs(np.asarray(coeffs, dtype=float) @ rows)))


def _orthants(k):
    # c and -c give the same sup-norm, so fix the first sign.
    for rest in itertools.product((1.0, -1.0), repeat=k - 1):
        yield (1.0,) + rest


def _l1_lp(rows: np.ndarray) -> tuple:
    k, n = rows.shape
    best_val, best_c = math.inf, None
    cost = np.zeros(k + 1)
    cost[-1] = 1.0
    a_eq = np.ones((1, k + 1))
    a_eq[0, -1] = 0.0
    bounds = [(0, None)] * k + [(None, None)]
    for signs in _orthants(k):
        signed = rows * np.asarray(signs)[:, None]  # (k, n)
        a_ub = np.vstack([
            np.hstack([signed.T, -np.ones((n, 1))]),
            np.hstack([-signed.T, -np.ones((n, 1))]),
        ])
        res = linprog(cost, A_ub=a_ub, b_ub=np.zeros(2 * n), A_eq=a_eq, b_eq=[1.0],
                      bounds=bounds, method="highs")
        if res.status != 0:
            raise RuntimeError(f"LP failed in orthant {signs}: {res.message}")
        w = np.clip(res.x[:k], 0.0, None)
        c = w * np.asarray(signs) / w.sum()
        val = sup_norm_of_combination(rows, c)
        if val < best_val:
            best_val, best_c = val, c
    return best_val, best_c


def l1_sphere_grid(k: int, m: int) -> np.ndarray:
    """Integer points with absolute sum ``m`` divided by ``m``; first nonzero
    coordinate positive (one representative per ``+-c`` pair)."""
    def compositions(total, parts):
        if parts == 1:
            return np.array([[total]])
        blocks = [np.hstack([np.full((len(sub), 1), head), sub])
                  for head in range(total + 1)
                  for sub in [compositions(total - head, parts - 1)]]
        return np.vstack(blocks)

    comps = compositions(m, k)
    out = []
    for signs in itertools.product((1, -1), repeat=k):
        s = np.asarray(signs)
        signed = comps * s
        # Drop sign choices that land on a zero coordinate (duplicates).
        keep = np.all((comps > 0) | (s > 0), axis=1)
        signed = signed[keep]
        nz = signed != 0
        first = signed[np.arange(len(signed)), nz.argmax(axis=1)]
        out.append(signed[first > 0])
    return np.vstack(out) / m


def _l1_grid(rows: np.ndarray, tolerance: float, max_points: int = 2_000_000) -> tuple:
    k = rows.shape[0]
    lip = float(np.max(np.abs(rows))) if rows.size else 0.0
    m = 2
    prev = None
    while True:
        grid = l1_sphere_grid(k, m)
        vals = np.max(np.abs(grid @ rows), axis=1)
        j = int(np.argmin(vals))
        cur = float(vals[j])
        err = lip * k / m
        if prev is not None and abs(prev - cur) < tolerance / 2 and err <= tolerance:
            return cur, grid[j], err
        if len(grid) * 2 ** (k - 1) > max_points:
            return cur, grid[j], err
        prev = cur
        m *= 2


def l1_constant(family: FunctionFamily, tolerance: float, method: str = "lp") -> L1Certificate:
    """Best ``a`` with ``a * sum|c_i| <= ||sum c_i f_i||_inf`` over the members.

    ``method="lp"`` solves one linear program per sign orthant;
    ``method="grid"`` scans refining lattices on the unit l1 sphere and
    records the Lipschitz error bound of the final lattice.
    """
    if len(family) == 0:
        raise EmptyFamily("l1 constant of an empty family")
    if not tolerance > 0:
        raise ToleranceNonPositive(f"tolerance must be positive, got {tolerance}")
    rows = np.array(family.rows(), dtype=float)
    if method == "lp":
        val, c = _l1_lp(rows)
        err = 0.0
    elif method == "grid":
        val, c, err = _l1_grid(rows, tolerance)
    else:
        raise ValueError(f"unknown method {method!r}")
    return L1Certificate(float(val), tuple(float(x) for x in c), float(tolerance), method, float(err))


@dataclass(frozen=True)
class L1LowerBound:
    bound: float
    constant: float
    holds: bool
    split_gap: float
    coefficients: tuple


def pattern_split_gap(witness: IndependenceWitness, family: FunctionFamily, coeffs) -> float:
    """``sum c_i f_i`` at the point of the sign-split pattern minus its value
    at the point of the swapped pattern.

    Members with positive coefficient go above ``b`` in the first pattern, the
    others below ``a``; the gap exceeds ``(b - a) * sum|c_i|``.
    """
    up = tuple(c >= 0 for c in coeffs)
    swapped = tuple(not u for u in up)
    x = witness.pattern_witnesses[up]
    y = witness.pattern_witnesses[swapped]
    fx = sum(c * family[i].values[x] for c, i in zip(coeffs, witness.indices))
    fy = sum(c * family[i].values[y] for c, i in zip(coeffs, witness.indices))
    return fx - fy


def independence_implies_l1(witness: IndependenceWitness, family: FunctionFamily,
                            tolerance: float = 1e-6) -> L1LowerBound:
    if not witness.validate(family):
        raise InvalidWitness("witness does not re-validate against the family")
    bound = (witness.b - witness.a) / 2
    cert = l1_constant(family.subfamily(witness.indices), tolerance)
    gap = pattern_split_gap(witness, family, cert.minimizing_coefficients)
    holds = cert.constant >= bound - tolerance
    return L1LowerBound(bound, cert.constant, holds, gap, cert.minimizing_coefficients)


@dataclass(frozen=True)
class DLPViolation:
    rows: tuple
    cols: tuple
    alpha: float
    beta: float

    def validate(self, values, delta: float, tail_tolerance: float) -> bool:
        v = np.asarray(values, dtype=float)
        if abs(self.alpha - self.beta) < delta:
            return False
        if list(self.rows) != sorted(set(self.rows)) or list(self.cols) != sorted(set(self.cols)):
            return False
        for p, i in enumerate(self.rows):
            for q, j in enumerate(self.cols):
                target = self.alpha if p <= q else self.beta
                if abs(v[i, j] - target) > tail_tolerance:
                    return False
        return True


def dlp_violation(values, delta: float, tail_tolerance: float, k: int) -> Optional[DLPViolation]:
    """Search for a k x k two-constants submatrix (rows and columns increasing).

    Entries with row position <= column position must sit within
    ``tail_tolerance`` of ``alpha``, the rest within it of ``beta``, with
    ``|alpha - beta| >= delta``.  Rows are enumerated lexicographically and
    columns by depth-first search with interval pruning.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 2:
        raise BadSize("values must be a matrix")
    n_rows, n_cols = v.shape
    if not 2 <= k <= min(n_rows, n_cols):
        raise BadSize(f"k must lie in 2..{min(n_rows, n_cols)}, got {k}")
    if not delta > 0:
        raise BadSize(f"delta must be positive, got {delta}")
    tol = tail_tolerance

    def separation(u, l):
        a_lo, a_hi = u[1] - tol, u[0] + tol
        b_lo, b_hi = l[1] - tol, l[0] + tol
        if a_hi - b_lo >= b_hi - a_lo:
            return a_hi - b_lo, a_hi, b_lo
        return b_hi - a_lo, a_lo, b_hi

    def widen(iv, vals):
        if not len(vals):
            return iv
        return min(iv[0], float(vals.min())), max(iv[1], float(vals.max()))

    empty = (math.inf, -math.inf)
    for rows in itertools.combinations(range(n_rows), k):
        sub = v[list(rows)]

        def dfs(q, start, cols, u, l):
            if q == k:
                sep, alpha, beta = separation(u, l)
                if sep >= delta:
                    return DLPViolation(rows, tuple(cols), alpha, beta)
                return None
            for j in range(start, n_cols - (k - q) + 1):
                col = sub[:, j]
                nu = widen(u, col[: q + 1])
                nl = widen(l, col[q + 1:])
                if nu[1] - nu[0] > 2 * tol or (nl[0] <= nl[1] and nl[1] - nl[0] > 2 * tol):
                    continue
                if nl[0] <= nl[1] and separation(nu, nl)[0] < delta:
                    continue
                found = dfs(q + 1, j + 1, cols + [j], nu, nl)
                if found is not None:
                    return found
            return None

        found = dfs(0, 0, [], empty, empty)
        if found is not None:
            return found
    return None
