"""Classical simulation of Simon's period-finding subroutine.

One circuit run prepares the uniform superposition over ``m`` input bits,
queries ``f`` once, applies ``H^m`` to the input register and measures.  The
measured ``y`` has probability

    P(y) = 2^(-2m) * sum_z | sum_{x : f(x) = z} (-1)^(x.y) |^2

which both samplers reproduce exactly:

* ``statevector`` builds that marginal once per function (via the collision
  autocorrelation and a Walsh-Hadamard transform) and samples from it;
* ``collapse`` measures the output register first: draw ``x0``, sweep the
  whole domain for the preimage set of ``f(x0)``, then sample ``y`` from the
  Hadamard image of that set.

Each sample counts as one superposition query.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)

STATEVECTOR_MAX_M = 20
COLLAPSE_MAX_M = 24
VERIFY_POINTS = 16
BACKENDS = ("statevector", "collapse")


class CapacityError(ValueError):
    pass


class TargetFunction:
    """A deterministic map from ``m``-bit inputs to ``n``-bit outputs.

    ``evaluator`` must accept either a plain int or a ``uint64`` array (and
    return the same kind); arrays are only used when ``m`` and ``n`` fit in
    64 bits.
    """

    def __init__(self, m: int, n: int, evaluator: Callable, promise: int | None = None,
                 name: str = "f"):
        if m < 1:
            raise ValueError("domain width must be positive")
        self.m = m
        self.n = n
        self.evaluator = evaluator
        self.promise = promise
        self.name = name
        self._table = None
        self._sv_probs = None
        self._warned = False

    def __repr__(self):
        return f"TargetFunction({self.name}, m={self.m}, n={self.n})"

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            return self.evaluator(x.astype(np.uint64))
        return int(self.evaluator(int(x)))

    def table(self) -> np.ndarray:
        """Outputs on the whole domain, evaluated once and cached."""
        if self._table is None:
            if self.m > COLLAPSE_MAX_M:
                raise CapacityError(f"m={self.m} exceeds {COLLAPSE_MAX_M}")
            self._table = np.asarray(self.evaluator(np.arange(1 << self.m, dtype=np.uint64)))
        return self._table


@dataclass
class SimonOutcome:
    samples: list
    recovered: int | None
    queries: int
    verified: bool
    status: str  # ok | no-period | undersampled | unverified
    kernel: list = field(default_factory=list)
    verify_evaluations: int = 0


def parity(x):
    """Bit parity of ints or uint64 arrays."""
    if isinstance(x, np.ndarray):
        x = x.copy()
        for sh in (32, 16, 8, 4, 2, 1):
            x ^= x >> np.uint64(sh)
        return x & np.uint64(1)
    return bin(x).count("1") & 1


def walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """Unnormalised fast Walsh-Hadamard transform (length a power of two)."""
    a = np.array(v, dtype=np.float64)
    h = 1
    size = a.shape[0]
    while h < size:
        a = a.reshape(-1, 2, h)
        a = np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1)
        h *= 2
    return a.reshape(size)


def _group_index(table: np.ndarray):
    _, inverse, counts = np.unique(table, return_inverse=True, return_counts=True)
    return inverse.reshape(-1), counts


def exact_distribution(f: TargetFunction) -> np.ndarray:
    """``P(y)`` for one circuit run, computed from the full truth table."""
    m = f.m
    if m > STATEVECTOR_MAX_M:
        raise CapacityError(f"statevector backend handles m <= {STATEVECTOR_MAX_M}, got {m}")
    size = 1 << m
    inverse, counts = _group_index(f.table())
    order = np.argsort(inverse, kind="stable")
    starts = np.concatenate(([0], np.cumsum(counts)))
    # collision autocorrelation C(d) = #{(x, x') : f(x) = f(x'), x ^ x' = d},
    # batched over groups of equal size
    corr = np.zeros(size, dtype=np.float64)
    probs = np.zeros(size, dtype=np.float64)
    for k in np.unique(counts):
        groups = np.flatnonzero(counts == k)
        if k <= 64:
            idx = starts[groups][:, None] + np.arange(k)[None, :]
            members = order[idx]
            diffs = (members[:, :, None] ^ members[:, None, :]).reshape(-1)
            corr += np.bincount(diffs, minlength=size)
        else:
            for g in groups:
                ind = np.zeros(size)
                ind[order[starts[g]:starts[g + 1]]] = 1.0
                probs += walsh_hadamard(ind) ** 2
    probs += walsh_hadamard(corr)
    probs /= float(size) ** 2
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def sample_query_statevector(f: TargetFunction, rng: np.random.Generator) -> int:
    if f._sv_probs is None:
        f._sv_probs = exact_distribution(f)
    return int(rng.choice(1 << f.m, p=f._sv_probs))


def _sample_from_set(points: np.ndarray, m: int, rng: np.random.Generator, f=None) -> int:
    size = 1 << m
    k = len(points)
    if k == 1:
        return int(rng.integers(size))
    if k == 2:
        d = int(points[0] ^ points[1])
        y = int(rng.integers(size))
        if parity(y & d):
            y ^= d & -d  # flip the lowest set bit of d: bijection onto d-perp
        return y
    if k > 4 and f is not None and not f._warned:
        f._warned = True
        log.info("%s: collapsed preimage set of size %d, f is not 2-to-1 here", f.name, k)
    ys = np.arange(size, dtype=np.uint64)
    amp = np.zeros(size, dtype=np.float64)
    for p in points:
        amp += 1.0 - 2.0 * parity(ys & np.uint64(p)).astype(np.float64)
    w = amp ** 2
    return int(rng.choice(size, p=w / w.sum()))


def sample_query_collapse(f: TargetFunction, rng: np.random.Generator) -> int:
    if f.m > COLLAPSE_MAX_M:
        raise CapacityError(f"collapse backend handles m <= {COLLAPSE_MAX_M}, got {f.m}")
    table = f.table()
    x0 = int(rng.integers(1 << f.m))
    pre = np.flatnonzero(table == table[x0]).astype(np.uint64)
    return _sample_from_set(pre, f.m, rng, f)


SAMPLERS = {"statevector": sample_query_statevector, "collapse": sample_query_collapse}


def solve_kernel(samples, m: int) -> list[int]:
    """Basis of ``{s : y.s = 0 for every sample y}`` over GF(2)."""
    pivots: dict[int, int] = {}  # pivot column -> fully reduced row
    for y in samples:
        y = int(y)
        for col, row in pivots.items():
            if (y >> col) & 1:
                y ^= row
        if not y:
            continue
        col = y.bit_length() - 1
        for c, row in pivots.items():
            if (row >> col) & 1:
                pivots[c] = row ^ y
        pivots[col] = y
    basis = []
    for free in range(m):
        if free in pivots:
            continue
        s = 1 << free
        for col, row in pivots.items():
            if (row >> free) & 1:
                s |= 1 << col
        basis.append(s)
    return basis


def verify_period(f: TargetFunction, s: int, rng: np.random.Generator,
                  points: int = VERIFY_POINTS) -> bool:
    xs = rng.integers(0, 1 << f.m, size=points, dtype=np.uint64)
    return bool(np.all(f(xs) == f(xs ^ np.uint64(s))))


def recover_period(f: TargetFunction, c: int = 4, backend: str = "collapse",
                   rng: np.random.Generator | None = None) -> SimonOutcome:
    """Run the subroutine ``c*m`` times and solve for the hidden period."""
    if c < 1:
        raise ValueError("c must be at least 1")
    if backend not in SAMPLERS:
        raise ValueError(f"unknown backend {backend!r}")
    rng = rng if rng is not None else np.random.default_rng()
    sampler = SAMPLERS[backend]
    samples = [sampler(f, rng) for _ in range(c * f.m)]
    kernel = solve_kernel(samples, f.m)
    out = SimonOutcome(samples, None, len(samples), False, "", kernel)
    if not kernel:
        out.status = "no-period"
    elif len(kernel) > 1:
        out.status = "undersampled"
    else:
        out.recovered = kernel[0]
        out.verify_evaluations = 2 * VERIFY_POINTS
        out.verified = verify_period(f, kernel[0], rng)
        out.status = "ok" if out.verified else "unverified"
    return out
