"""AR(k) toolkit: characteristic roots, theoretical and empirical serial
correlations, seeded simulation, and the sum statistics used by the moment
calculations.

The process is X_i = alpha_1*X_{i-1} + ... + alpha_k*X_{i-k} + eps_i with
iid Gaussian noise.  It is asymptotically stationary iff every root of
lambda**k = alpha_1*lambda**(k-1) + ... + alpha_k lies strictly inside the
unit disk, in which case the serial correlation is a mixture of geometric
terms rho_j = sum_i A_i * lambda_i**|j|.  The A_i are recovered here
numerically (Yule-Walker solve for rho_1..rho_{k-1}, then a Vandermonde
solve), since the closed form is not needed.

Note: `empirical_acf` uses the known-zero-mean estimator (no sample-mean
subtraction) because the process mean is exactly zero.  Generic ACF tools
subtract the mean and will differ slightly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from .lambda_sums import CLUSTER_DELTA


class NotStationaryError(ValueError):
    """Operation requires a stationary model."""


class AcfConfluentError(ValueError):
    """Repeated characteristic roots: the geometric-mixture coefficients are
    undefined.  Carries the recursion-based correlations in ``rhos``."""

    def __init__(self, message: str, rhos: list[float]):
        super().__init__(message)
        self.rhos = rhos


class BadLagError(ValueError):
    """Lag j out of range for the sample length."""


class DegenerateSampleError(ValueError):
    """All-zero sample: autocorrelations undefined."""


@dataclass(frozen=True)
class ARModel:
    alphas: tuple[float, ...]
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "sigma", float(self.sigma))
        if len(self.alphas) < 1:
            raise ValueError("need at least one coefficient")
        if self.alphas[-1] == 0:
            raise ValueError("alpha_k must be nonzero (drop trailing zeros)")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")

    @property
    def k(self) -> int:
        return len(self.alphas)


@dataclass(frozen=True)
class CharRoots:
    roots: tuple[complex, ...]
    stationary: bool


@dataclass(frozen=True)
class AcfModel:
    roots: tuple[complex, ...]
    coeffs: tuple[complex, ...]


@dataclass(frozen=True)
class SeriesSample:
    values: np.ndarray
    seed: int
    burn_in: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or len(vals) < 1:
            raise ValueError("values must be a nonempty 1-D array")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return len(self.values)


def char_roots(alphas: Sequence[float]) -> CharRoots:
    """Roots of lambda**k = alpha_1*lambda**(k-1) + ... + alpha_k."""
    alphas = [float(a) for a in alphas]
    k = len(alphas)
    if k < 1:
        raise ValueError("need at least one coefficient")
    if k == 1:
        roots = (complex(alphas[0]),)
    else:
        poly = np.concatenate([[1.0], -np.asarray(alphas)])
        roots = tuple(sorted(np.roots(poly), key=lambda z: (-abs(z), -z.real, -z.imag)))
    for lam in roots:
        resid = abs(lam**k - sum(a * lam ** (k - 1 - i) for i, a in enumerate(alphas)))
        if resid > 1e-10 * (1 + abs(lam)) ** k:
            raise RuntimeError(f"root residual {resid:g} too large at {lam}")
    stationary = all(abs(lam) < 1 for lam in roots)
    return CharRoots(tuple(complex(z) for z in roots), stationary)


def _rho_recursion(alphas: Sequence[float], j_max: int) -> list[float]:
    """rho_0..rho_{j_max} via Yule-Walker: solve for the first k-1 lags,
    then extend by rho_j = sum_i alpha_i * rho_{j-i}."""
    alphas = [float(a) for a in alphas]
    k = len(alphas)
    rho = [1.0]
    if k > 1:
        # unknowns rho_1..rho_{k-1}: rho_j = sum_i alpha_i * rho_{|j-i|}
        a = np.zeros((k - 1, k - 1))
        b = np.zeros(k - 1)
        for j in range(1, k):
            a[j - 1, j - 1] += 1.0
            for i in range(1, k + 1):
                lag = abs(j - i)
                if lag == 0:
                    b[j - 1] += alphas[i - 1]
                elif lag <= k - 1:
                    a[j - 1, lag - 1] -= alphas[i - 1]
                else:
                    raise AssertionError("lag out of range in Yule-Walker build")
        rho.extend(np.linalg.solve(a, b).tolist())
    for j in range(k, j_max + 1):
        rho.append(sum(alphas[i] * rho[j - 1 - i] for i in range(k)))
    return rho[: j_max + 1]


def acf(alphas: Sequence[float], j_max: int) -> tuple[AcfModel, list[float]]:
    """Theoretical serial correlations and their geometric-mixture form.

    Returns (AcfModel with roots and coefficients A_i, [rho_0..rho_{j_max}]).
    Raises AcfConfluentError for repeated characteristic roots; the
    exception carries the recursion-based rho values.
    """
    cr = char_roots(alphas)
    if not cr.stationary:
        raise NotStationaryError("serial correlations require a stationary model")
    k = len(cr.roots)
    rho = _rho_recursion(alphas, max(j_max, k - 1))

    scale = 1.0 + max(abs(z) for z in cr.roots)
    for i in range(k):
        for j in range(i + 1, k):
            if abs(cr.roots[i] - cr.roots[j]) <= CLUSTER_DELTA * scale:
                raise AcfConfluentError(
                    "repeated characteristic roots: geometric-mixture "
                    "coefficients unavailable",
                    rho[: j_max + 1],
                )

    vand = np.array([[lam**j for lam in cr.roots] for j in range(k)], dtype=complex)
    coeffs = np.linalg.solve(vand, np.asarray(rho[:k], dtype=complex))
    if abs(coeffs.sum() - 1) > 1e-10:
        raise RuntimeError("mixture coefficients do not sum to 1")
    for j in range(min(j_max, len(rho) - 1) + 1):
        mix = sum(a * lam**j for a, lam in zip(coeffs, cr.roots))
        if abs(mix - rho[j]) > 1e-9:
            raise RuntimeError(
                f"mixture and recursion correlations disagree at lag {j}"
            )
    return AcfModel(cr.roots, tuple(coeffs.tolist())), rho[: j_max + 1]


def default_burn_in(alphas: Sequence[float]) -> int:
    """Smallest burn-in with max|lambda|**burn_in < 1e-12."""
    cr = char_roots(alphas)
    r = max(abs(lam) for lam in cr.roots)
    if r == 0:
        return len(list(alphas))
    return max(len(list(alphas)), math.ceil(math.log(1e-12) / math.log(r)))


def simulate(
    model: ARModel, n: int, burn_in: int | None = None, seed: int = 0
) -> SeriesSample:
    """Simulate n observations from the stationary phase.

    Deterministic given (seed, n, burn_in): noise comes from numpy's seeded
    PCG64 generator, the recursion starts from a zero state, and the first
    burn_in values are discarded.
    """
    cr = char_roots(model.alphas)
    if not cr.stationary:
        raise NotStationaryError("cannot simulate a non-stationary model")
    if burn_in is None:
        burn_in = default_burn_in(model.alphas)
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    eps = model.sigma * rng.standard_normal(burn_in + n)
    # X = eps filtered through 1 / (1 - a1 z^-1 - ... - ak z^-k), zero state
    denom = np.concatenate([[1.0], -np.asarray(model.alphas)])
    x = lfilter([1.0], denom, eps)
    return SeriesSample(x[burn_in:], seed=seed, burn_in=burn_in)


def sum_stats(sample: SeriesSample, j: int) -> tuple[float, float]:
    """(sum of X_i, sum of X_i * X_{i+j} for i = 1..n-j)."""
    if j < 0 or j >= sample.n:
        raise BadLagError(f"lag {j} out of range for n={sample.n}")
    x = sample.values
    sum_x = float(x.sum())
    if j == 0:
        sum_xx = float(np.dot(x, x))
    else:
        sum_xx = float(np.dot(x[:-j], x[j:]))
    return sum_x, sum_xx


def empirical_acf(sample: SeriesSample, j_max: int) -> list[float]:
    """Zero-mean sample autocorrelations r_0..r_{j_max}."""
    if j_max < 0 or j_max >= sample.n:
        raise BadLagError(f"j_max {j_max} out of range for n={sample.n}")
    _, denom = sum_stats(sample, 0)
    if denom == 0:
        raise DegenerateSampleError("all-zero sample")
    return [sum_stats(sample, j)[1] / denom for j in range(j_max + 1)]


def write_csv(sample: SeriesSample, path) -> None:
    """One value per line under a single `x` header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x"])
        for v in sample.values:
            writer.writerow([repr(float(v))])
