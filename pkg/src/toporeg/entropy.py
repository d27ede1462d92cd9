"""Persistent entropy and separation of topological features from noise.

Persistent entropy of a barcode with lengths l_1..l_n is the Shannon entropy
of the normalized lengths p_i = l_i / S, S = sum(l_i), using the 0*log(0) = 0
convention.  It is maximal (log n) exactly when all bars are equal and lives
in [0, log n].

Feature selection works on the premise that the longest bar T is always a
feature and the shortest bar r is always noise.  Candidate bars are examined
longest-first; candidate i is tested by replacing the first i candidates with
i copies of the length that would maximize the entropy of the resulting
barcode ("neutralizing" them).  While each neutralization *shrinks* the total
bar mass, the longest bar keeps gaining probability and the candidates so far
behave like features; the first candidate whose neutralization fails to do so
is noise, along with everything shorter.  A closed-form cap Q on the number
of admissible features (a function of alpha = r/T and the bar count) bounds
the scan: when the cap is hit, the not-yet-examined candidates are discarded
as noise and the scan restarts on the survivors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .persistence import Barcode


def persistent_entropy(lengths) -> float:
    """Shannon entropy (natural log) of the normalized bar lengths.

    Zero-length bars contribute nothing; the total length must be positive.
    """
    l = np.asarray(lengths, dtype=np.float64)
    if l.ndim != 1 or l.size == 0:
        raise ValueError("lengths must be a nonempty 1-D sequence")
    if not np.isfinite(l).all() or (l < 0).any():
        raise ValueError("lengths must be finite and nonnegative")
    total = float(l.sum())
    if total <= 0.0:
        raise ValueError("degenerate barcode: total bar length is zero")
    p = l / total
    nz = p[p > 0.0]
    return float(-(nz * np.log(nz)).sum()) + 0.0


def max_feature_count(alpha: float, n: int) -> int:
    """Cap on the number of admissible features for bar-length ratio alpha.

    Evaluates alpha*n*(alpha - 1 - log(alpha)) / (alpha - 1)**2 and rounds to
    the nearest integer, halves away from zero.  Positive for alpha in (0, 1);
    tends to 0 as alpha -> 0+ and to n/2 as alpha -> 1-.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    value = alpha * n * (alpha - 1.0 - math.log(alpha)) / (alpha - 1.0) ** 2
    return int(math.floor(value + 0.5))


@dataclass
class SelectionResult:
    """Partition of a barcode into topological features and noise.

    ``selected`` and ``noise`` are indices into the source barcode's bar
    list; the longest bar is always selected.  ``q_trace`` records
    (iteration, Q, C) for every scan step across restarts, where C is the
    ratio of the neutralized barcode's total length to the previous one
    (the scan stops as soon as C >= 1).
    """

    selected: list[int]
    noise: list[int]
    alpha: float
    q_trace: list[tuple[int, int, float]] = field(default_factory=list)


def _scan(
    middle: list[tuple[float, int]],
    r_len: float,
    t_len: float,
    alpha: float,
    trace: list[tuple[int, int, float]],
) -> list[tuple[float, int]]:
    """One selection pass over candidates sorted longest-first.

    Returns the (length, index) pairs judged to be features.  Restarts on a
    truncated candidate list whenever the Q cap is hit with candidates still
    unexamined, which strictly shrinks the list and guarantees termination.
    """
    n_prime = len(middle) + 2
    if alpha > 0.0:
        q = max_feature_count(alpha, n_prime)
    else:
        q = 0  # alpha -> 0+ limit of the closed form
    s_prev = sum(l for l, _ in middle) + r_len + t_len
    for i in range(1, len(middle) + 1):
        tail = [l for l, _ in middle[i:]] + [r_len, t_len]
        p_i = sum(tail)
        ent_tail = persistent_entropy(tail) if p_i > 0.0 else 0.0
        neutral = p_i / math.exp(ent_tail)
        s_cur = p_i + i * neutral
        c = s_cur / s_prev if s_prev > 0.0 else math.inf
        trace.append((i, q, c))
        if c >= 1.0:
            # neutralizing candidate i no longer boosts the longest bar's
            # share: i and everything shorter is noise
            return middle[: i - 1]
        if q <= i < len(middle):
            return _scan(middle[:i], r_len, t_len, alpha, trace)
        s_prev = s_cur
    return middle


def select_features(barcode: Barcode | np.ndarray) -> SelectionResult:
    """Split a barcode's bars into topological features and noise.

    Accepts a Barcode or a bare 1-D array of bar lengths.  The longest bar is
    always a feature; the shortest is noise whenever the lengths are not all
    equal.  All-equal barcodes (alpha = 1) are maximum-entropy already and are
    returned fully selected.
    """
    if isinstance(barcode, Barcode):
        lengths = barcode.lengths()
    else:
        lengths = np.asarray(barcode, dtype=np.float64)
    n = lengths.size
    if n == 0:
        raise ValueError("cannot select features of an empty barcode")
    if not np.isfinite(lengths).all() or (lengths < 0).any():
        raise ValueError("bar lengths must be finite and nonnegative")

    if n == 1:
        return SelectionResult(selected=[0], noise=[], alpha=1.0)

    t_idx = int(np.argmax(lengths))
    r_idx = int(np.argmin(lengths))
    t_len = float(lengths[t_idx])
    r_len = float(lengths[r_idx])

    if r_len == t_len:
        # uniform barcode: nothing to neutralize, every bar is a feature
        return SelectionResult(selected=list(range(n)), noise=[], alpha=1.0)

    alpha = r_len / t_len
    rest = [(float(lengths[k]), k) for k in range(n) if k not in (t_idx, r_idx)]
    rest.sort(key=lambda pair: (-pair[0], pair[1]))

    trace: list[tuple[int, int, float]] = []
    kept = _scan(rest, r_len, t_len, alpha, trace)

    selected = sorted([t_idx] + [k for _, k in kept])
    noise = sorted(set(range(n)) - set(selected))
    return SelectionResult(selected=selected, noise=noise, alpha=alpha, q_trace=trace)
