"""Domain types for jump linear systems, switching laws, and Gaussian mixtures.

Construction enforces structural soundness only (shapes, finiteness,
nonemptiness); value-level invariants such as probability sums, row
stochasticity, PSD covariances, and cross-object dimensional consistency
are checked by :func:`validate_system`, which collects every violation
into a report, and re-enforced (as hard ``ValueError``) by the operations
that consume the objects. This split lets the validator report a broken
input instead of refusing to build it.

Mode indices are 1-based in all user-facing values (sequences, messages),
matching the convention for ``A_1 .. A_m``; internal array indexing is
0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .matkit import as_square

__all__ = [
    "JumpLinearSystem",
    "GaussianComponent",
    "GaussianMixture",
    "IIDSwitching",
    "MarkovSwitching",
    "ScheduleSwitching",
    "SequenceSwitching",
    "SwitchingLaw",
    "SecondMomentState",
    "ValidationReport",
    "StationaryResult",
    "validate_system",
    "marginal_schedule",
    "stationary_distribution",
    "check_probability_vector",
    "check_transition_matrix",
    "as_probability_vector",
    "law_mode_count",
]

#: Probability sums may deviate from 1 by this much and are renormalized.
PROB_TOL = 1e-9

#: Negative probabilities above this floor are treated as roundoff and clamped.
CLAMP_TOL = 1e-12


def _vector(v, name: str) -> np.ndarray:
    x = np.asarray(v, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={x.ndim}")
    if x.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x


def check_probability_vector(v, name: str = "probabilities") -> list[str]:
    """Return the list of probability-vector violations (empty if valid).

    Entries must lie in [0, 1] up to roundoff slack and sum to 1 within
    1e-9.
    """
    try:
        x = _vector(v, name)
    except ValueError as exc:
        return [str(exc)]
    out = []
    if np.min(x) < -CLAMP_TOL or np.max(x) > 1.0 + CLAMP_TOL:
        out.append(
            f"{name}: entries must lie in [0, 1], got range "
            f"[{np.min(x):.12g}, {np.max(x):.12g}]"
        )
    s = float(np.sum(x))
    if abs(s - 1.0) > PROB_TOL:
        out.append(f"{name}: probability sum {s:.12g} != 1")
    return out


def as_probability_vector(v, name: str = "probabilities") -> np.ndarray:
    """Validate, clamp roundoff negatives to 0, and renormalize to sum 1.

    Raises ``ValueError`` listing the violations if the vector is invalid
    beyond tolerance.
    """
    violations = check_probability_vector(v, name)
    if violations:
        raise ValueError("; ".join(violations))
    x = np.clip(np.asarray(v, dtype=float), 0.0, None)
    return x / np.sum(x)


def check_transition_matrix(p, name: str = "P") -> list[str]:
    """Row-stochasticity violations of a square matrix (empty if valid)."""
    try:
        mat = as_square(p, name)
    except ValueError as exc:
        return [str(exc)]
    out = []
    for i, row in enumerate(mat):
        for msg in check_probability_vector(row, f"{name} row {i + 1}"):
            out.append(msg)
    return out


@dataclass(frozen=True, eq=False)
class JumpLinearSystem:
    """Finite collection of mode matrices A_1 .. A_m acting on R^n.

    Parameters
    ----------
    modes : sequence of (n, n) array_like
        The mode dynamics matrices, all square and of equal size.
    names : sequence of str, optional
        Mode labels for reporting; defaults to "mode 1", "mode 2", ...

    The stacked array is stored as a read-only (m, n, n) float64 array.
    """

    modes: np.ndarray
    names: tuple = None

    def __post_init__(self):
        mats = [
            as_square(a, f"mode {j + 1}") for j, a in enumerate(self.modes)
        ]
        if not mats:
            raise ValueError("system needs at least one mode")
        n = mats[0].shape[0]
        for j, a in enumerate(mats):
            if a.shape != (n, n):
                raise ValueError(
                    f"mode {j + 1} has shape {a.shape}, expected ({n}, {n})"
                )
        stacked = np.stack(mats)
        stacked.setflags(write=False)
        object.__setattr__(self, "modes", stacked)
        if self.names is not None:
            names = tuple(str(s) for s in self.names)
            if len(names) != len(mats):
                raise ValueError(
                    f"{len(names)} names for {len(mats)} modes"
                )
            object.__setattr__(self, "names", names)

    @property
    def m(self) -> int:
        """Number of modes."""
        return self.modes.shape[0]

    @property
    def n(self) -> int:
        """State dimension."""
        return self.modes.shape[1]

    def mode_name(self, j: int) -> str:
        """Display name of 0-based mode ``j``."""
        if self.names is not None:
            return self.names[j]
        return f"mode {j + 1}"


@dataclass(frozen=True, eq=False)
class GaussianComponent:
    """One weighted Gaussian: weight alpha, mean mu, covariance Sigma."""

    weight: float
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        w = float(self.weight)
        if not np.isfinite(w):
            raise ValueError("component weight must be finite")
        object.__setattr__(self, "weight", w)
        mean = _vector(self.mean, "component mean")
        cov = as_square(self.cov, "component cov")
        if cov.shape[0] != mean.size:
            raise ValueError(
                f"component cov shape {cov.shape} does not match mean "
                f"dimension {mean.size}"
            )
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """Gaussian mixture stored as stacked arrays.

    Parameters
    ----------
    weights : (q,) array_like
    means : (q, n) array_like
    covs : (q, n, n) array_like

    Stacked storage keeps propagation vectorized when the component count
    grows geometrically. Use :meth:`from_components` to build from
    per-component values.
    """

    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray

    def __post_init__(self):
        w = _vector(self.weights, "mixture weights")
        means = np.asarray(self.means, dtype=float)
        covs = np.asarray(self.covs, dtype=float)
        if means.ndim != 2:
            raise ValueError(f"means must be (q, n), got ndim={means.ndim}")
        if covs.ndim != 3 or covs.shape[1] != covs.shape[2]:
            raise ValueError(
                f"covs must be (q, n, n), got shape {covs.shape}"
            )
        q, n = means.shape
        if n == 0:
            raise ValueError("mixture dimension must be positive")
        if w.size != q or covs.shape[0] != q or covs.shape[1] != n:
            raise ValueError(
                f"inconsistent mixture shapes: weights {w.shape}, "
                f"means {means.shape}, covs {covs.shape}"
            )
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(covs))):
            raise ValueError("mixture contains non-finite entries")
        for arr in (w, means, covs):
            arr.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", covs)

    @classmethod
    def from_components(cls, components: Iterable) -> "GaussianMixture":
        """Build from GaussianComponent values or (weight, mean, cov) triples."""
        comps = [
            c if isinstance(c, GaussianComponent) else GaussianComponent(*c)
            for c in components
        ]
        if not comps:
            raise ValueError("mixture needs at least one component")
        return cls(
            weights=np.array([c.weight for c in comps]),
            means=np.stack([c.mean for c in comps]),
            covs=np.stack([c.cov for c in comps]),
        )

    @property
    def q(self) -> int:
        """Component count."""
        return self.weights.size

    @property
    def n(self) -> int:
        """State dimension."""
        return self.means.shape[1]

    @property
    def components(self) -> list:
        """Per-component view as GaussianComponent values."""
        return [
            GaussianComponent(self.weights[i], self.means[i], self.covs[i])
            for i in range(self.q)
        ]


def check_mixture(mix: GaussianMixture, psd_tol: float = 1e-10) -> list[str]:
    """Value-level mixture violations: weight signs, weight sum, PSD covs."""
    out = []
    if np.min(mix.weights) <= 0.0:
        out.append(
            f"mixture weights must be positive, got minimum "
            f"{np.min(mix.weights):.12g}"
        )
    s = float(np.sum(mix.weights))
    if abs(s - 1.0) > PROB_TOL:
        out.append(f"mixture weights: probability sum {s:.12g} != 1")
    sym = (mix.covs + np.transpose(mix.covs, (0, 2, 1))) / 2.0
    eigs = np.linalg.eigvalsh(sym)
    bad = np.where(eigs[:, 0] < -psd_tol)[0]
    for i in bad:
        out.append(
            f"component {i + 1} covariance is not PSD: smallest eigenvalue "
            f"{eigs[i, 0]:.3e}"
        )
    return out


@dataclass(frozen=True, eq=False)
class IIDSwitching:
    """Modes drawn independently at every step from a fixed vector pi."""

    pi: np.ndarray

    def __post_init__(self):
        pi = _vector(self.pi, "pi")
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)


@dataclass(frozen=True, eq=False)
class MarkovSwitching:
    """Time-homogeneous Markov chain: transition matrix P, initial pi0."""

    P: np.ndarray
    pi0: np.ndarray

    def __post_init__(self):
        p = as_square(self.P, "P")
        pi0 = _vector(self.pi0, "pi0")
        if pi0.size != p.shape[0]:
            raise ValueError(
                f"pi0 has length {pi0.size}, P is {p.shape[0]}x{p.shape[0]}"
            )
        p.setflags(write=False)
        pi0.setflags(write=False)
        object.__setattr__(self, "P", p)
        object.__setattr__(self, "pi0", pi0)


@dataclass(frozen=True, eq=False)
class ScheduleSwitching:
    """Explicit per-step occupation vectors pi(1), pi(2), ...

    Beyond the stored horizon the last vector repeats.
    """

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.ndim != 2 or v.shape[0] == 0 or v.shape[1] == 0:
            raise ValueError(
                f"schedule must be a nonempty list of vectors, got shape "
                f"{v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("schedule contains non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)


@dataclass(frozen=True, eq=False)
class SequenceSwitching:
    """Deterministic mode sequence i_1, i_2, ... with 1-based indices.

    Beyond the stored length the sequence repeats cyclically, treating the
    stored indices as one period.
    """

    indices: tuple

    def __post_init__(self):
        try:
            idx = tuple(int(i) for i in self.indices)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"sequence indices must be integers: {exc}")
        if not idx:
            raise ValueError("sequence must be nonempty")
        if any(i != float(orig) for i, orig in zip(idx, self.indices)):
            raise ValueError("sequence indices must be integers")
        object.__setattr__(self, "indices", idx)


SwitchingLaw = Union[
    IIDSwitching, MarkovSwitching, ScheduleSwitching, SequenceSwitching
]


@dataclass(frozen=True, eq=False)
class SecondMomentState:
    """Second-moment matrix Phi(k) = mean mean^T + cov of the state at time k.

    Its trace is the squared Wasserstein distance to the origin mass.
    Phi must be square with finite entries; symmetry and positive
    semidefiniteness are enforced by the propagation steps (within
    tolerance) rather than at construction.
    """

    phi: np.ndarray
    k: int

    def __post_init__(self):
        phi = as_square(self.phi, "phi")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)
        k = int(self.k)
        if k < 0:
            raise ValueError(f"time index must be nonnegative, got {k}")
        object.__setattr__(self, "k", k)


def law_mode_count(law: SwitchingLaw):
    """Mode count implied by the law, or None when it carries none (Sequence)."""
    if isinstance(law, IIDSwitching):
        return law.pi.size
    if isinstance(law, MarkovSwitching):
        return law.P.shape[0]
    if isinstance(law, ScheduleSwitching):
        return law.vectors.shape[1]
    if isinstance(law, SequenceSwitching):
        return None
    raise TypeError(f"unknown switching law {type(law).__name__}")


def check_law(law: SwitchingLaw, m: int) -> list[str]:
    """Value-level violations of a switching law against mode count m."""
    out = []
    if isinstance(law, IIDSwitching):
        if law.pi.size != m:
            out.append(
                f"switching pi has length {law.pi.size} for {m} modes"
            )
        out += check_probability_vector(law.pi, "switching pi")
    elif isinstance(law, MarkovSwitching):
        if law.P.shape[0] != m:
            out.append(
                f"switching P is {law.P.shape[0]}x{law.P.shape[1]} for "
                f"{m} modes"
            )
        out += check_transition_matrix(law.P, "switching P")
        out += check_probability_vector(law.pi0, "switching pi0")
    elif isinstance(law, ScheduleSwitching):
        if law.vectors.shape[1] != m:
            out.append(
                f"schedule vectors have length {law.vectors.shape[1]} for "
                f"{m} modes"
            )
        for k, row in enumerate(law.vectors):
            out += check_probability_vector(row, f"schedule step {k + 1}")
    elif isinstance(law, SequenceSwitching):
        bad = [i for i in law.indices if not 1 <= i <= m]
        if bad:
            out.append(
                f"sequence indices {sorted(set(bad))} outside [1..{m}]"
            )
    else:
        out.append(f"unknown switching law {type(law).__name__}")
    return out


@dataclass(frozen=True)
class ValidationReport:
    """Every violated invariant found by validate_system (empty = valid)."""

    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "OK"
        return "\n".join(f"violation: {v}" for v in self.violations)


def validate_system(
    sys: JumpLinearSystem,
    law: SwitchingLaw,
    init: GaussianMixture,
) -> ValidationReport:
    """Collect every violated invariant across a system / law / mixture triple.

    Checks value-level invariants (probability sums, row stochasticity,
    PSD covariances, sequence index ranges) and dimensional consistency
    between the three objects. Structural soundness is already enforced
    by the constructors. Never raises; the report carries the failures.
    """
    violations = list(check_law(law, sys.m))
    violations += check_mixture(init)
    if init.n != sys.n:
        violations.append(
            f"initial mixture has dimension {init.n}, system has n={sys.n}"
        )
    return ValidationReport(tuple(violations))


def marginal_schedule(
    law: SwitchingLaw, k_max: int, m: int = None
) -> np.ndarray:
    """Per-step mode marginals pi(1) .. pi(k_max) as a (k_max, m) array.

    IID laws repeat pi; Markov laws evolve pi(k) = pi0 P^k; schedules
    return their stored vectors, repeating the last one beyond the stored
    horizon; sequences yield exact indicator vectors, cycling through the
    stored period.

    Parameters
    ----------
    law : SwitchingLaw
    k_max : int
        Number of steps. Zero yields an empty (0, m) array.
    m : int, optional
        Mode count; required for Sequence laws (a bare index list does
        not determine it), inferred from the law otherwise.

    Raises
    ------
    ValueError
        If the law is invalid, k_max is negative, or m is missing or
        inconsistent.
    """
    k_max = int(k_max)
    if k_max < 0:
        raise ValueError(f"k_max must be nonnegative, got {k_max}")
    m_law = law_mode_count(law)
    if m_law is None:
        if m is None:
            raise ValueError(
                "m is required for Sequence laws: the index list does not "
                "determine the mode count"
            )
        m = int(m)
    elif m is None:
        m = m_law
    elif int(m) != m_law:
        raise ValueError(f"m={m} inconsistent with law mode count {m_law}")
    violations = check_law(law, m)
    if violations:
        raise ValueError("; ".join(violations))

    out = np.zeros((k_max, m))
    if isinstance(law, IIDSwitching):
        out[:] = as_probability_vector(law.pi, "switching pi")
    elif isinstance(law, MarkovSwitching):
        p = law.P
        pi = as_probability_vector(law.pi0, "switching pi0")
        for k in range(k_max):
            pi = pi @ p
            pi = np.clip(pi, 0.0, None)
            pi /= np.sum(pi)
            out[k] = pi
    elif isinstance(law, ScheduleSwitching):
        stored = law.vectors.shape[0]
        for k in range(k_max):
            row = law.vectors[min(k, stored - 1)]
            out[k] = as_probability_vector(row, f"schedule step {k + 1}")
    elif isinstance(law, SequenceSwitching):
        period = len(law.indices)
        for k in range(k_max):
            out[k, law.indices[k % period] - 1] = 1.0
    return out


@dataclass(frozen=True)
class StationaryResult:
    """Outcome of a stationary-distribution search.

    status is "unique" (single eigenvalue-1 direction, residual below
    tolerance), "non-unique" (eigenvalue-1 eigenspace of dimension > 1;
    ``vector`` is one valid choice), or "none-found" (no usable
    probability eigenvector). ``residual`` is the achieved
    ``max |pi P - pi|`` when a vector is returned.
    """

    status: str
    vector: np.ndarray = None
    residual: float = None


def stationary_distribution(
    P, tol: float = 1e-9
) -> StationaryResult:
    """Left eigenvector of a row-stochastic P for eigenvalue 1.

    Eigenvalues within ``tol`` of 1 define the candidate space; candidate
    eigenvectors are realified, clipped, and normalized to probability
    vectors, and the one with the smallest stationarity residual is
    returned.

    Raises
    ------
    ValueError
        If P is not row-stochastic within tolerance.
    """
    p = as_square(P, "P")
    violations = check_transition_matrix(p, "P")
    if violations:
        raise ValueError("; ".join(violations))
    w, v = np.linalg.eig(p.T)
    near_one = np.where(np.abs(w - 1.0) < tol)[0]
    if near_one.size == 0:
        return StationaryResult("none-found")
    best = None
    for i in near_one:
        cand = np.real(v[:, i])
        s = float(np.sum(cand))
        if abs(s) < 1e-12:
            continue
        cand = np.clip(cand / s, 0.0, None)
        total = float(np.sum(cand))
        if total <= 0.0:
            continue
        cand = cand / total
        residual = float(np.max(np.abs(cand @ p - cand)))
        if best is None or residual < best[1]:
            best = (cand, residual)
    if best is None or best[1] >= tol:
        return StationaryResult("none-found")
    status = "unique" if near_one.size == 1 else "non-unique"
    return StationaryResult(status, best[0], best[1])
