"""Seeded generators for the benchmark families, plus file I/O."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Domain, MlpInstance, parse_instance, write_instance

COEFF_RANGE = 100


def _coeffs(rng: np.random.Generator, size: int) -> np.ndarray:
    """Integers uniform on [-100, 100] without zero."""
    c = rng.integers(1, COEFF_RANGE + 1, size=size)
    return np.where(rng.random(size) < 0.5, -c, c)


def gen_mult(n: int, m: int, degree: int, seed: int = 0, max_tries: int = 1000) -> MlpInstance:
    """``m`` distinct monomials of exact ``degree`` over ``n`` variables."""
    if not 1 <= degree <= n:
        raise ValueError(f"degree {degree} impossible with n = {n}")
    if m > math.comb(n, degree):
        raise ValueError(f"only {math.comb(n, degree)} distinct supports of degree {degree} over {n} variables")
    rng = np.random.default_rng(seed)
    supports: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    tries = 0
    while len(supports) < m:
        J = tuple(sorted(int(j) for j in rng.choice(n, size=degree, replace=False)))
        if J in seen:
            tries += 1
            if tries > max_tries * m:
                raise RuntimeError("too many duplicate draws")
            continue
        seen.add(J)
        supports.append(J)
    coeffs = _coeffs(rng, m)
    return MlpInstance.from_terms(n, zip(coeffs.tolist(), supports))


def vision_terms(g: int) -> list[tuple[int, ...]]:
    """Supports of the degree >= 2 terms of a g x g grid, block by block (row-major cells)."""
    if g < 2:
        raise ValueError("grid side must be at least 2")
    out = []
    for r in range(g - 1):
        for c in range(g - 1):
            a, b = r * g + c, r * g + c + 1
            d, e = a + g, b + g
            out += [(a, e), (b, d)]
            out += [(a, b, d), (a, b, e), (a, d, e), (b, d, e)]
            out.append((a, b, d, e))
    return out


def gen_vision(g: int, seed: int = 0, l_seed: int | None = None) -> MlpInstance:
    """Grid energy: per 2x2 block two diagonal, four corner and one square term, plus linear terms.

    ``l_seed`` redraws only the linear part, keeping the higher-order terms of ``seed``.
    """
    supports = vision_terms(g)
    rng = np.random.default_rng(seed)
    high = _coeffs(rng, len(supports))
    lin = _coeffs(np.random.default_rng([seed if l_seed is None else l_seed, 1]), g * g)
    terms = list(zip(high.tolist(), supports)) + [(c, (j,)) for j, c in enumerate(lin.tolist())]
    return MlpInstance.from_terms(g * g, terms)


def gen_autocorr(L: int, max_lag: int) -> MlpInstance:
    """Expand sum_k (sum_i x_i x_{i+k})^2 on binaries, using x^2 = x."""
    if not 1 <= max_lag < L:
        raise ValueError("need 1 <= max_lag < L")
    acc: Counter = Counter()
    for k in range(1, max_lag + 1):
        pairs = [(i, i + k) for i in range(L - k)]
        for p, q in itertools.product(pairs, repeat=2):
            acc[tuple(sorted(set(p) | set(q)))] += 1
    terms = sorted(acc.items(), key=lambda kv: (len(kv[0]), kv[0]))
    return MlpInstance.from_terms(L, [(float(c), J) for J, c in terms], Domain.BINARY)


@dataclass(frozen=True)
class GenSpec:
    family: str  # mult3, mult4, vision, autocorr
    n: int = 0
    m: int = 0
    grid: int = 0
    length: int = 0
    max_lag: int = 0
    seed: int = 0

    def generate(self) -> MlpInstance:
        if self.family in ("mult3", "mult4"):
            return gen_mult(self.n, self.m, int(self.family[-1]), self.seed)
        if self.family == "vision":
            return gen_vision(self.grid, self.seed)
        if self.family == "autocorr":
            return gen_autocorr(self.length, self.max_lag)
        raise ValueError(f"unknown family {self.family!r}")


def save_instance(mlp: MlpInstance, path: str | Path) -> None:
    Path(path).write_text(write_instance(mlp), encoding="utf-8")


def load_instance(path: str | Path) -> MlpInstance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))
