"""q-integers, the multiplier phi and fiber dimensions."""
from __future__ import annotations

from .errors import DimensionOverflowError, ShapeError

_INT64_MAX = 2**63 - 1


def _check_q(q: float) -> None:
    if not (0.0 < q <= 1.0):
        raise ValueError(f"q must lie in (0, 1], got {q!r}")


def q_int(n: int, q: float) -> float:
    """[n]_q as the geometric sum q^(n-1) + q^(n-3) + ... + q^(1-n)."""
    _check_q(q)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if q == 1.0:
        return float(n)
    return float(sum(q ** (n - 1 - 2 * j) for j in range(n)))


def phi(n: int, q: float) -> float:
    """[n]_q / [n+1]_q."""
    return q_int(n, q) / q_int(n + 1, q)


def q_from_trace(trace: float) -> float:
    """Root in (0, 1] of q + 1/q = trace (trace >= 2)."""
    if trace < 2.0:
        raise ValueError("trace must be at least 2")
    disc = trace * trace - 4.0
    # 2 / (t + sqrt(t^2 - 4)) is the small root without cancellation
    return 2.0 / (trace + disc**0.5)


def fiber_dims(m: int, N: int) -> list[int]:
    """d_0..d_N with d_0 = 1, d_1 = m, d_{n+1} = m d_n - d_{n-1}."""
    if m < 2:
        raise ShapeError("m must be at least 2")
    if N < 0:
        raise ValueError("N must be nonnegative")
    dims = [1, m][: N + 1]
    while len(dims) <= N:
        nxt = m * dims[-1] - dims[-2]
        if nxt > _INT64_MAX:
            raise DimensionOverflowError(f"fiber dimension at level {len(dims)} exceeds 64-bit range")
        dims.append(nxt)
    return dims
