"""Seeded Monte Carlo ensemble simulator.

Serves as an independent empirical oracle for the analytic W^2(k)
trajectory: the mean of ||x(k)||^2 across trajectories estimates the
squared Wasserstein distance to the origin mass.

Reproducibility contract
------------------------
Trajectory ``i`` draws from its own generator,
``PCG64(SeedSequence(entropy=seed, spawn_key=(i,)))``, with a fixed draw
layout: one uniform for the initial component, ``n`` standard normals
for the initial state, then ``k_max`` uniforms for the mode picks (drawn
under every law, even deterministic ones, so streams stay aligned across
sampling semantics). Each trajectory writes its own row of the result
array and the final reduction runs once over the full array, so the
output is bit-identical for any chunking or thread count.

Two sampling semantics are exposed. ``marginal`` draws every step's mode
independently from the per-step occupation vector; this is the joint law
whose second moments the analytic recursions track, for every switching
law. ``path`` (Markov laws only) follows the chain's conditional rows
instead; it shares the per-step marginals but correlates consecutive
modes, so its ensemble moments may deviate from the marginal recursion.
The two coincide when consecutive modes are in fact independent.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass

import numpy as np
import scipy.stats

from .matkit import NumericalError, sqrtm_psd, symmetrize
from .sysmodel import (
    GaussianMixture,
    JumpLinearSystem,
    MarkovSwitching,
    SwitchingLaw,
    marginal_schedule,
    validate_system,
)

__all__ = [
    "SimConfig",
    "EnsembleStats",
    "sample_initial",
    "simulate_ensemble",
    "KURTOSIS_THRESHOLD",
]

#: Plain kurtosis (Gaussian = 3) beyond which standard errors are flagged
#: as unreliable.
KURTOSIS_THRESHOLD = 100.0

_CHUNK = 4096

_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class SimConfig:
    """Ensemble run parameters.

    ``seed`` is a 64-bit nonnegative integer; ``sampling`` is "marginal"
    (independent per-step marginals, valid for every law) or "path"
    (Markov chain transitions, Markov laws only).
    """

    trajectories: int
    k_max: int
    seed: int = 0
    sampling: str = "marginal"

    def __post_init__(self):
        t = int(self.trajectories)
        if t < 1:
            raise ValueError(f"trajectories must be >= 1, got {t}")
        object.__setattr__(self, "trajectories", t)
        k = int(self.k_max)
        if k < 0:
            raise ValueError(f"k_max must be nonnegative, got {k}")
        object.__setattr__(self, "k_max", k)
        s = int(self.seed)
        if not 0 <= s < 2**64:
            raise ValueError(f"seed must fit in 64 bits, got {s}")
        object.__setattr__(self, "seed", s)
        if self.sampling not in ("marginal", "path"):
            raise ValueError(
                f"sampling must be marginal or path, got {self.sampling!r}"
            )


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    """Per-step ensemble statistics, index k = 0 .. k_max.

    ``mean_sq[k]`` is the empirical mean of ||x(k)||^2, ``stderr[k]`` its
    standard error (sample standard deviation over sqrt(count); zero for
    single-trajectory runs), ``samples[k]`` the trajectory count, and
    ``heavy_tail[k]`` flags steps whose plain kurtosis exceeds
    KURTOSIS_THRESHOLD, where the standard error should not be trusted.
    """

    mean_sq: np.ndarray
    stderr: np.ndarray
    samples: np.ndarray
    heavy_tail: np.ndarray

    @property
    def k_max(self) -> int:
        return self.mean_sq.size - 1


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """Matrix F with F F^T = cov, for PSD cov.

    Cholesky when positive definite, the spectral square root for
    rank-deficient input, and a diagonal jitter of 1e-12 tr(cov)/n as a
    last resort before giving up.
    """
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    try:
        return sqrtm_psd(cov)
    except ValueError:
        pass
    n = cov.shape[0]
    jitter = 1e-12 * max(float(np.trace(cov)), 0.0) / n
    jittered = symmetrize(cov) + jitter * np.eye(n)
    try:
        return np.linalg.cholesky(jittered)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"covariance factorization failed after jitter: {exc}"
        ) from exc


def _pick(uniforms: np.ndarray, cuts: np.ndarray) -> np.ndarray:
    """Index of the weight bucket each uniform falls into.

    ``cuts`` are the first m-1 cumulative weights (one row, or one row
    per uniform); bucket j covers [cut_{j-1}, cut_j).
    """
    if cuts.ndim == 1:
        return (uniforms[:, None] >= cuts[None, :]).sum(axis=1)
    return (uniforms[:, None] >= cuts).sum(axis=1)


def _trajectory_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))
    )


def sample_initial(init: GaussianMixture, rng: np.random.Generator) -> np.ndarray:
    """Draw one state from a Gaussian mixture.

    Picks the component with a single uniform against the cumulative
    weights, then applies a PSD factor of its covariance to a standard
    normal vector. Draw order (one uniform, then n normals) matches the
    ensemble simulator's per-trajectory layout.
    """
    weights = init.weights / np.sum(init.weights)
    cum = np.cumsum(weights)
    u = rng.random()
    idx = int(np.sum(u >= cum[:-1]))
    z = rng.standard_normal(init.n)
    return init.means[idx] + _psd_factor(init.covs[idx]) @ z


def simulate_ensemble(
    sys: JumpLinearSystem,
    law: SwitchingLaw,
    init: GaussianMixture,
    cfg: SimConfig,
    threads: int = 1,
) -> EnsembleStats:
    """Estimate E||x(k)||^2 for k = 0 .. cfg.k_max over an ensemble.

    Deterministic per seed: results are bit-identical across runs and
    thread counts (see the module docstring for the stream layout).
    ``threads`` only controls execution; it is not part of the
    statistical configuration.

    Raises
    ------
    ValueError
        On invalid inputs, or path sampling with a non-Markov law.
    """
    report = validate_system(sys, law, init)
    if not report.ok:
        raise ValueError("; ".join(report.violations))
    if cfg.sampling == "path" and not isinstance(law, MarkovSwitching):
        raise ValueError(
            f"path sampling requires a Markov switching law, got "
            f"{type(law).__name__}"
        )
    threads = max(int(threads), 1)

    big_t, k_max = cfg.trajectories, cfg.k_max
    n, m = sys.n, sys.m
    weights = init.weights / np.sum(init.weights)
    cum_init = np.cumsum(weights)[:-1]
    factors = np.stack([_psd_factor(c) for c in init.covs])
    mode_t = np.transpose(sys.modes, (0, 2, 1)).copy()

    if cfg.sampling == "path":
        rows = np.clip(law.P, 0.0, None)
        rows = rows / rows.sum(axis=1, keepdims=True)
        cum_rows = np.cumsum(rows, axis=1)[:, :-1]
        first = marginal_schedule(law, 1, m=m)
        cum_first = np.cumsum(first[0])[:-1] if k_max >= 1 else None
        cum_sched = None
    else:
        schedule = marginal_schedule(law, k_max, m=m)
        cum_sched = np.cumsum(schedule, axis=1)[:, :-1]
        cum_rows = cum_first = None

    normsq = np.empty((big_t, k_max + 1))

    def run_chunk(lo: int, hi: int) -> None:
        count = hi - lo
        u0 = np.empty(count)
        z = np.empty((count, n))
        u_modes = np.empty((count, k_max))
        for i in range(count):
            gen = _trajectory_rng(cfg.seed, lo + i)
            u0[i] = gen.random()
            z[i] = gen.standard_normal(n)
            u_modes[i] = gen.random(k_max)

        idx0 = _pick(u0, cum_init)
        x = init.means[idx0] + np.einsum("tab,tb->ta", factors[idx0], z)
        normsq[lo:hi, 0] = np.einsum("ti,ti->t", x, x)
        prev = None
        for k in range(k_max):
            if cfg.sampling == "path":
                cuts = cum_first if k == 0 else cum_rows[prev]
            else:
                cuts = cum_sched[k]
            modes = _pick(u_modes[:, k], cuts)
            for j in range(m):
                sel = modes == j
                if np.any(sel):
                    x[sel] = x[sel] @ mode_t[j]
            normsq[lo:hi, k + 1] = np.einsum("ti,ti->t", x, x)
            prev = modes

    bounds = [
        (lo, min(lo + _CHUNK, big_t)) for lo in range(0, big_t, _CHUNK)
    ]
    if threads == 1 or len(bounds) == 1:
        for lo, hi in bounds:
            run_chunk(lo, hi)
    else:
        with concurrent.futures.ThreadPoolExecutor(threads) as pool:
            list(pool.map(lambda b: run_chunk(*b), bounds))

    mean_sq = normsq.mean(axis=0)
    if big_t >= 2:
        stderr = normsq.std(axis=0, ddof=1) / np.sqrt(big_t)
    else:
        stderr = np.zeros(k_max + 1)
    heavy = np.zeros(k_max + 1, dtype=bool)
    # a spread at rounding level means the samples are numerically
    # identical; kurtosis there is pure cancellation noise
    spread = stderr > 1e-12 * np.maximum(np.abs(mean_sq), _TINY)
    if np.any(spread):
        with np.errstate(invalid="ignore", divide="ignore"):
            kurt = scipy.stats.kurtosis(
                normsq[:, spread], axis=0, fisher=False, bias=True
            )
        heavy[spread] = np.nan_to_num(kurt) > KURTOSIS_THRESHOLD
    return EnsembleStats(
        mean_sq=mean_sq,
        stderr=stderr,
        samples=np.full(k_max + 1, big_t, dtype=np.int64),
        heavy_tail=heavy,
    )
