"""State-PDF and second-moment propagation.

Three routes compute the squared Wasserstein-to-origin trajectory
W^2(k) of a jump linear system started from a Gaussian mixture:

``exact_mog``
    Pushes the full mixture through the mode maps. One step against
    marginals pi(k) turns q components into m*q with weights
    pi_j(k)*alpha_i, means A_j mu_i, and covariances A_j Sigma_i A_j^T,
    so counts grow geometrically and a hard cap applies.

``moment``
    Propagates only the n x n second moment,
    Phi(k) = sum_j pi_j(k) A_j Phi(k-1) A_j^T, whose trace equals
    W^2(k). Default method: same numbers as the lifted product at n x n
    cost.

``gamma``
    Folds the n^2 x n^2 lifted step matrices
    A(i) = sum_j pi_j(i) (A_j kron A_j) into the reverse-ordered product
    Gamma(k) and reads off W^2(k) = vec(I)^T Gamma(k) vec(Phi(0)).

The three must agree to rounding; their agreement is a correctness check
of the whole chain and is asserted by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matkit import NumericalError, vec
from .sysmodel import (
    GaussianMixture,
    JumpLinearSystem,
    SecondMomentState,
    SwitchingLaw,
    as_probability_vector,
    marginal_schedule,
    validate_system,
)
from .wasserstein import mixture_to_dirac_sq, synthetic_gaussian

__all__ = [
    "GammaState",
    "TrajectoryRecord",
    "lifted_step_matrix",
    "mog_step",
    "mog_propagate",
    "moment_step",
    "gamma_product",
    "w2_trajectory",
    "DEFAULT_COMPONENT_CAP",
    "DIVERGENCE_GUARD",
]

#: Hard ceiling on exact-mixture component counts.
DEFAULT_COMPONENT_CAP = 100_000

#: Entry magnitudes beyond this flag divergence instead of risking overflow.
DIVERGENCE_GUARD = 1e150


@dataclass(frozen=True, eq=False)
class GammaState:
    """Reverse-ordered product Gamma(k) of lifted step matrices.

    Gamma(0) is the n^2 x n^2 identity. ``diverged`` marks a product
    whose next factor would push entries past the overflow guard; in
    that case ``gamma`` holds the last finite product and ``k`` the
    number of steps actually folded.
    """

    gamma: np.ndarray
    k: int
    diverged: bool = False


@dataclass(frozen=True)
class TrajectoryRecord:
    """One time point of a W^2 trajectory.

    ``w2`` and ``phi_trace`` are the same quantity through different
    readings (vec(I)^T vec(Phi) = tr Phi); the exact-mixture method
    computes them independently, the moment methods by construction.
    ``component_count`` is populated by exact-mixture runs only.
    """

    k: int
    w2: float
    phi_trace: float
    component_count: int = None


def lifted_step_matrix(sys: JumpLinearSystem, pi_k) -> np.ndarray:
    """One-step lift sum_j pi_j (A_j kron A_j), acting on vec(Phi)."""
    pi = as_probability_vector(pi_k, "pi_k")
    if pi.size != sys.m:
        raise ValueError(f"pi_k has length {pi.size} for {sys.m} modes")
    n2 = sys.n * sys.n
    out = np.zeros((n2, n2))
    for j in range(sys.m):
        if pi[j] != 0.0:
            a = sys.modes[j]
            out += pi[j] * np.kron(a, a)
    return out


def mog_step(
    sys: JumpLinearSystem,
    pi_k,
    mix: GaussianMixture,
    weight_floor: float = 0.0,
) -> GaussianMixture:
    """Push a Gaussian mixture through one switching step.

    Every (mode j, component i) pair yields an output component with
    weight pi_j * alpha_i, mean A_j mu_i, covariance A_j Sigma_i A_j^T,
    ordered mode-major (all of mode 1's images first). Components whose
    weight falls below ``weight_floor`` are pruned, as are the
    zero-weight pairs produced by modes with pi_j = 0; surviving weights
    are renormalized to sum 1.

    Raises
    ------
    ValueError
        On dimension mismatch or if pruning removes everything.
    """
    pi = as_probability_vector(pi_k, "pi_k")
    if pi.size != sys.m:
        raise ValueError(f"pi_k has length {pi.size} for {sys.m} modes")
    if mix.n != sys.n:
        raise ValueError(
            f"mixture has dimension {mix.n}, system has n={sys.n}"
        )
    weights = np.outer(pi, mix.weights).reshape(-1)
    means = np.einsum("jab,ib->jia", sys.modes, mix.means).reshape(-1, sys.n)
    covs = np.einsum(
        "jab,ibc,jdc->jiad", sys.modes, mix.covs, sys.modes
    ).reshape(-1, sys.n, sys.n)
    covs = (covs + np.transpose(covs, (0, 2, 1))) / 2.0

    floor = max(float(weight_floor), 0.0)
    # zero-weight pairs are always dead mass; a positive floor widens the cut
    keep = weights >= floor if floor > 0.0 else weights > 0.0
    if not np.any(keep):
        raise ValueError(
            f"weight_floor={weight_floor:g} prunes every component"
        )
    weights = weights[keep]
    return GaussianMixture(
        weights=weights / weights.sum(),
        means=means[keep],
        covs=covs[keep],
    )


def mog_propagate(
    sys: JumpLinearSystem,
    law: SwitchingLaw,
    init: GaussianMixture,
    k: int,
    cap: int = DEFAULT_COMPONENT_CAP,
    weight_floor: float = 0.0,
) -> GaussianMixture:
    """Exact mixture after ``k`` switching steps.

    Without pruning the result has exactly m^k * q0 components (modes of
    zero probability excepted), so the count is checked against ``cap``
    up front and the run refuses to start if it cannot finish. With
    ``weight_floor`` pruning the cap is enforced per step instead.
    """
    k = int(k)
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    report = validate_system(sys, law, init)
    if not report.ok:
        raise ValueError("; ".join(report.violations))
    if k == 0:
        return init
    if weight_floor <= 0.0:
        final = init.q * sys.m**k
        if final > cap:
            raise ValueError(
                f"exact propagation reaches m^k*q0 = {sys.m}^{k}*{init.q} "
                f"= {final} components, beyond cap={cap}; raise the cap "
                f"or set a weight_floor"
            )
    schedule = marginal_schedule(law, k, m=sys.m)
    mix = init
    for step in range(k):
        mix = mog_step(sys, schedule[step], mix, weight_floor)
        if mix.q > cap:
            raise ValueError(
                f"component count {mix.q} exceeds cap={cap} at step "
                f"{step + 1} despite weight_floor={weight_floor:g}"
            )
    return mix


def moment_step(
    sys: JumpLinearSystem, pi_k, state: SecondMomentState
) -> SecondMomentState:
    """One second-moment update Phi(k) = sum_j pi_j(k) A_j Phi(k-1) A_j^T."""
    pi = as_probability_vector(pi_k, "pi_k")
    if pi.size != sys.m:
        raise ValueError(f"pi_k has length {pi.size} for {sys.m} modes")
    if state.phi.shape != (sys.n, sys.n):
        raise ValueError(
            f"phi has shape {state.phi.shape}, system has n={sys.n}"
        )
    phi = np.einsum(
        "j,jab,bc,jdc->ad", pi, sys.modes, state.phi, sys.modes
    )
    return SecondMomentState(phi=(phi + phi.T) / 2.0, k=state.k + 1)


def gamma_product(
    sys: JumpLinearSystem,
    law: SwitchingLaw,
    k: int,
    guard: float = DIVERGENCE_GUARD,
) -> GammaState:
    """Reverse-ordered product Gamma(k) = A(k) A(k-1) ... A(1).

    Gamma(0) is the identity. If a multiplication would push any entry
    magnitude past ``guard``, the fold stops and returns the last finite
    product with ``diverged=True`` (the ``k`` field then reports how many
    factors were folded).
    """
    k = int(k)
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    n2 = sys.n * sys.n
    gamma = np.eye(n2)
    if k == 0:
        return GammaState(gamma=gamma, k=0)
    schedule = marginal_schedule(law, k, m=sys.m)
    for step in range(k):
        nxt = lifted_step_matrix(sys, schedule[step]) @ gamma
        if np.max(np.abs(nxt)) > guard:
            return GammaState(gamma=gamma, k=step, diverged=True)
        gamma = nxt
    return GammaState(gamma=gamma, k=k)


def _initial_moment(init: GaussianMixture) -> tuple[float, np.ndarray]:
    mean, cov = synthetic_gaussian(init)
    phi0 = np.outer(mean, mean) + cov
    phi0 = (phi0 + phi0.T) / 2.0
    return float(np.trace(phi0)), phi0


def w2_trajectory(
    sys: JumpLinearSystem,
    law: SwitchingLaw,
    init: GaussianMixture,
    k_max: int,
    method: str = "moment",
    cap: int = DEFAULT_COMPONENT_CAP,
    weight_floor: float = 0.0,
) -> list:
    """Squared Wasserstein-to-origin trajectory W^2(k) for k = 0 .. k_max.

    W^2(0) comes from the initial mixture's matched moments; later points
    from the chosen method ("moment", "gamma", or "exact_mog"). The
    exact-mixture method records component counts and computes ``w2``
    (weighted component distances) and ``phi_trace`` (matched-moment
    trace) independently; the other two produce one number read two ways.

    Raises
    ------
    ValueError
        On invalid inputs, unknown method, or exact-mixture cap overflow.
    NumericalError
        If the second moment diverges past the overflow guard before
        k_max (unstable growth; the message names the failing step).
    """
    k_max = int(k_max)
    if k_max < 0:
        raise ValueError(f"k_max must be nonnegative, got {k_max}")
    if method not in ("moment", "gamma", "exact_mog"):
        raise ValueError(
            f"unknown method {method!r}: expected moment, gamma, or "
            f"exact_mog"
        )
    report = validate_system(sys, law, init)
    if not report.ok:
        raise ValueError("; ".join(report.violations))

    w2_0, phi0 = _initial_moment(init)
    if method == "exact_mog":
        records = [
            TrajectoryRecord(
                k=0, w2=mixture_to_dirac_sq(init), phi_trace=w2_0,
                component_count=init.q,
            )
        ]
    else:
        records = [TrajectoryRecord(k=0, w2=w2_0, phi_trace=w2_0)]
    if k_max == 0:
        return records

    schedule = marginal_schedule(law, k_max, m=sys.m)

    if method == "moment":
        state = SecondMomentState(phi=phi0, k=0)
        for step in range(k_max):
            state = moment_step(sys, schedule[step], state)
            if np.max(np.abs(state.phi)) > DIVERGENCE_GUARD:
                raise NumericalError(
                    f"second moment diverged at k={step + 1} "
                    f"(entry magnitude exceeds {DIVERGENCE_GUARD:g})"
                )
            w2 = float(np.trace(state.phi))
            records.append(
                TrajectoryRecord(k=step + 1, w2=w2, phi_trace=w2)
            )
    elif method == "gamma":
        n2 = sys.n * sys.n
        gamma = np.eye(n2)
        vec_phi0 = vec(phi0)
        vec_id = vec(np.eye(sys.n))
        for step in range(k_max):
            gamma = lifted_step_matrix(sys, schedule[step]) @ gamma
            if np.max(np.abs(gamma)) > DIVERGENCE_GUARD:
                raise NumericalError(
                    f"lifted product diverged at k={step + 1} "
                    f"(entry magnitude exceeds {DIVERGENCE_GUARD:g})"
                )
            w2 = float(vec_id @ gamma @ vec_phi0)
            records.append(
                TrajectoryRecord(k=step + 1, w2=w2, phi_trace=w2)
            )
    else:
        if weight_floor <= 0.0:
            final = init.q * sys.m**k_max
            if final > cap:
                raise ValueError(
                    f"exact propagation reaches m^k*q0 = "
                    f"{sys.m}^{k_max}*{init.q} = {final} components, "
                    f"beyond cap={cap}; raise the cap or set a "
                    f"weight_floor"
                )
        mix = init
        for step in range(k_max):
            mix = mog_step(sys, schedule[step], mix, weight_floor)
            if mix.q > cap:
                raise ValueError(
                    f"component count {mix.q} exceeds cap={cap} at step "
                    f"{step + 1} despite weight_floor={weight_floor:g}"
                )
            mean, cov = synthetic_gaussian(mix)
            records.append(
                TrajectoryRecord(
                    k=step + 1,
                    w2=mixture_to_dirac_sq(mix),
                    phi_trace=float(mean @ mean + np.trace(cov)),
                    component_count=mix.q,
                )
            )
    return records
