"""Worst-case (all-reject) analysis for a pool of offer candidates.

Agents split into a rejective group with representative utility u_minus < 0
and a receptive group with u_plus > 0; each is rejective independently with
probability alpha. The probability that all n agents reject is

    W(alpha) = (alpha * p_rejective + (1 - alpha) * p_receptive) ** n

with the group rejection probabilities given by the logistic model. Two
extensions: a system-awareness term (1 - S) * gamma * R added to utilities
(selfless behavior), and a zero-mean utility shift xi shared by all agents
(environmental noise), where W becomes an expectation over xi. Shared
Gaussian noise is integrated by Gauss-Hermite quadrature; Rademacher noise
has an exact two-point form.

The tipping point alpha* solves W(alpha*) = delta. Without noise it has a
closed form; with noise it is found by bisection (W is strictly increasing
in alpha), and its sensitivity d(alpha*)/d(theta) follows from the implicit
function theorem with both partials taken by central finite differences.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DegenerateGradient, EmptyGrid, NoTippingPoint
from .fileio import fmt12

# Central finite-difference step for both alpha and theta, clamped to
# one-sided at domain boundaries.
FD_STEP = 1e-4

# Finite-difference values above -1e-12 count as zero when classifying
# gradient signs, so round-off never masquerades as a negative gradient.
NEGATIVE_GRADIENT_CUTOFF = -1e-12

DEFAULT_GH_NODES = 61


class NoiseKind(enum.Enum):
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"


@dataclass(frozen=True)
class WorstCaseScenario:
    """Group-level inputs: n agents, representative utilities, sensitivity,
    and the acceptable all-reject probability delta."""

    n: int
    u_minus: float
    u_plus: float
    beta: float
    delta: float

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        u_minus, u_plus = float(self.u_minus), float(self.u_plus)
        if math.isnan(u_minus) or math.isnan(u_plus) or not u_minus < 0.0 < u_plus:
            raise ValueError(
                f"need u_minus < 0 < u_plus, got u_minus={self.u_minus!r}, u_plus={self.u_plus!r}"
            )
        beta = float(self.beta)
        if math.isnan(beta) or beta <= 0.0:
            raise ValueError(f"beta must be > 0, got {self.beta!r}")
        delta = float(self.delta)
        if math.isnan(delta) or not 0.0 < delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")
        object.__setattr__(self, "u_minus", u_minus)
        object.__setattr__(self, "u_plus", u_plus)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "delta", delta)


@dataclass(frozen=True)
class SocialParams:
    """Selfishness S in [0, 1], system sensitivity gamma > 0, and the
    estimated overall rejection rate R in [0, 1]."""

    s: float
    gamma: float
    r: float

    def __post_init__(self):
        s = float(self.s)
        if math.isnan(s) or not 0.0 <= s <= 1.0:
            raise ValueError(f"s must lie in [0, 1], got {self.s!r}")
        gamma = float(self.gamma)
        if math.isnan(gamma) or gamma <= 0.0:
            raise ValueError(f"gamma must be > 0, got {self.gamma!r}")
        r = float(self.r)
        if math.isnan(r) or not 0.0 <= r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {self.r!r}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class NoiseSpec:
    """Shared zero-mean utility noise: Gaussian with std theta, or
    Rademacher taking +/- theta with equal probability. gh_nodes controls
    the Gauss-Hermite rule used for the Gaussian expectation."""

    kind: NoiseKind
    theta: float
    gh_nodes: int = DEFAULT_GH_NODES

    def __post_init__(self):
        if not isinstance(self.kind, NoiseKind):
            raise ValueError(f"kind must be a NoiseKind, got {self.kind!r}")
        theta = float(self.theta)
        if math.isnan(theta) or theta < 0.0:
            raise ValueError(f"theta must be >= 0, got {self.theta!r}")
        object.__setattr__(self, "theta", theta)
        if not isinstance(self.gh_nodes, int) or self.gh_nodes < 1:
            raise ValueError(f"gh_nodes must be a positive integer, got {self.gh_nodes!r}")


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if math.isnan(alpha) or not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    return alpha


def group_reject_probs(scn: WorstCaseScenario) -> tuple[float, float]:
    """(p_rejective, p_receptive): logistic rejection probabilities of the
    two groups. p_rejective > 0.5 > p_receptive since u_minus < 0 < u_plus."""
    return (
        float(expit(-scn.beta * scn.u_minus)),
        float(expit(-scn.beta * scn.u_plus)),
    )


def worst_case_prob(scn: WorstCaseScenario, alpha: float) -> float:
    """Probability that all n agents reject, for rejective fraction alpha."""
    alpha = _check_alpha(alpha)
    p_rej, p_rec = group_reject_probs(scn)
    return (alpha * p_rej + (1.0 - alpha) * p_rec) ** scn.n


def _tipping_from_probs(n: int, delta: float, p_rej: float, p_rec: float) -> float:
    root = delta ** (1.0 / n)
    if root < p_rec - 1e-12 or root > p_rej + 1e-12:
        raise NoTippingPoint(
            f"delta^(1/n) = {root:.6g} outside [{p_rec:.6g}, {p_rej:.6g}]; "
            "no mixture reaches the threshold"
        )
    alpha_star = (root - p_rec) / (p_rej - p_rec)
    return min(max(alpha_star, 0.0), 1.0)


def tipping_point(scn: WorstCaseScenario) -> float:
    """Closed-form alpha* with W(alpha*) = delta; raises NoTippingPoint when
    delta is unreachable."""
    p_rej, p_rec = group_reject_probs(scn)
    return _tipping_from_probs(scn.n, scn.delta, p_rej, p_rec)


def social_reject_probs(scn: WorstCaseScenario, soc: SocialParams) -> tuple[float, float]:
    """Group rejection probabilities with the system-awareness utility term
    (1 - S) * gamma * R added to both representative utilities."""
    shift = (1.0 - soc.s) * soc.gamma * soc.r
    return (
        float(expit(-scn.beta * (scn.u_minus + shift))),
        float(expit(-scn.beta * (scn.u_plus + shift))),
    )


def social_worst_case_prob(scn: WorstCaseScenario, soc: SocialParams, alpha: float) -> float:
    alpha = _check_alpha(alpha)
    p_rej, p_rec = social_reject_probs(scn, soc)
    return (alpha * p_rej + (1.0 - alpha) * p_rec) ** scn.n


def social_tipping_point(scn: WorstCaseScenario, soc: SocialParams) -> float:
    """Closed-form tipping point under the system-awareness adjustment."""
    p_rej, p_rec = social_reject_probs(scn, soc)
    return _tipping_from_probs(scn.n, scn.delta, p_rej, p_rec)


def _noise_points(noise: NoiseSpec, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Shift values and probability weights for the shared-noise expectation."""
    if noise.kind is NoiseKind.RADEMACHER:
        return np.array([theta, -theta]), np.array([0.5, 0.5])
    nodes, weights = np.polynomial.hermite.hermgauss(noise.gh_nodes)
    return math.sqrt(2.0) * theta * nodes, weights / weights.sum()


def _noisy_w_vector(
    scn: WorstCaseScenario, noise: NoiseSpec, alphas: np.ndarray, theta: float
) -> np.ndarray:
    """W(alpha, theta) for an array of alphas at a single theta."""
    if theta == 0.0:
        p_rej, p_rec = group_reject_probs(scn)
        return (alphas * p_rej + (1.0 - alphas) * p_rec) ** scn.n
    shifts, weights = _noise_points(noise, theta)
    p_rej = expit(-scn.beta * (scn.u_minus + shifts))
    p_rec = expit(-scn.beta * (scn.u_plus + shifts))
    mixture = np.outer(alphas, p_rej) + np.outer(1.0 - alphas, p_rec)
    return (mixture**scn.n) @ weights


def noisy_worst_case_prob(scn: WorstCaseScenario, noise: NoiseSpec, alpha: float) -> float:
    """All-reject probability under a single noise realization shared by all
    agents, averaged over that realization. theta = 0 reduces exactly to
    worst_case_prob."""
    alpha = _check_alpha(alpha)
    return float(_noisy_w_vector(scn, noise, np.array([alpha]), noise.theta)[0])


def noisy_tipping_point(scn: WorstCaseScenario, noise: NoiseSpec) -> float:
    """alpha with |W(alpha, theta) - delta| <= 1e-10, by bisection.

    W is strictly increasing in alpha (the integrand is, for every noise
    realization), so a sign bracket on [0, 1] suffices.
    """
    delta = scn.delta
    w0 = noisy_worst_case_prob(scn, noise, 0.0)
    w1 = noisy_worst_case_prob(scn, noise, 1.0)
    if not w0 - 1e-12 <= delta <= w1 + 1e-12:
        raise NoTippingPoint(
            f"delta = {delta:.6g} outside [W(0) = {w0:.6g}, W(1) = {w1:.6g}]"
        )
    if abs(w0 - delta) <= 1e-10:
        return 0.0
    if abs(w1 - delta) <= 1e-10:
        return 1.0
    lo, hi = 0.0, 1.0
    mid = 0.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        w_mid = noisy_worst_case_prob(scn, noise, mid)
        if abs(w_mid - delta) <= 1e-11 or hi - lo < 1e-15:
            return mid
        if w_mid < delta:
            lo = mid
        else:
            hi = mid
    raise ArithmeticError("bisection failed to reach the 1e-10 residual target")


def _w_at(scn: WorstCaseScenario, noise: NoiseSpec, alpha: float, theta: float) -> float:
    return float(_noisy_w_vector(scn, noise, np.array([alpha]), theta)[0])


def _dw_dtheta(scn, noise, alpha: float, theta: float, h: float = FD_STEP) -> float:
    if theta >= h:
        return (_w_at(scn, noise, alpha, theta + h) - _w_at(scn, noise, alpha, theta - h)) / (
            2.0 * h
        )
    return (_w_at(scn, noise, alpha, theta + h) - _w_at(scn, noise, alpha, theta)) / h


def _dw_dalpha(scn, noise, alpha: float, theta: float, h: float = FD_STEP) -> float:
    if alpha < h:
        return (_w_at(scn, noise, alpha + h, theta) - _w_at(scn, noise, alpha, theta)) / h
    if alpha > 1.0 - h:
        return (_w_at(scn, noise, alpha, theta) - _w_at(scn, noise, alpha - h, theta)) / h
    return (_w_at(scn, noise, alpha + h, theta) - _w_at(scn, noise, alpha - h, theta)) / (2.0 * h)


def tipping_point_gradient(scn: WorstCaseScenario, noise: NoiseSpec) -> float:
    """d(alpha*)/d(theta) at the current noise scale, via the implicit
    function theorem: -(dW/dtheta) / (dW/dalpha) at (alpha*, theta)."""
    alpha_star = noisy_tipping_point(scn, noise)
    d_theta = _dw_dtheta(scn, noise, alpha_star, noise.theta)
    d_alpha = _dw_dalpha(scn, noise, alpha_star, noise.theta)
    if abs(d_alpha) < 1e-14:
        raise DegenerateGradient(
            f"dW/dalpha = {d_alpha:.3e} at the tipping point; implicit derivative undefined"
        )
    return -d_theta / d_alpha


@dataclass(frozen=True)
class GradientSignRow:
    """Fraction of (alpha, theta) grid cells with a strictly negative noise
    gradient, for one (n, |U|) instance. `cells` carries per-cell
    (alpha, theta, dW/dtheta) diagnostics when requested."""

    n: int
    u_abs: float
    noise_kind: NoiseKind
    fraction_negative: float
    cells: tuple[tuple[float, float, float], ...] | None = None


DEFAULT_ALPHA_GRID = tuple(round(0.02 * i, 10) for i in range(51))
DEFAULT_THETA_GRID = tuple(round(0.2 * i, 10) for i in range(51))
DEFAULT_N_VALUES = (2, 5, 10, 20)
DEFAULT_U_ABS_VALUES = (1.0, 2.0, 4.0, 8.0)


def gradient_sign_map(
    n_values=DEFAULT_N_VALUES,
    u_abs_values=DEFAULT_U_ABS_VALUES,
    noise_kind: NoiseKind = NoiseKind.RADEMACHER,
    alpha_grid=DEFAULT_ALPHA_GRID,
    theta_grid=DEFAULT_THETA_GRID,
    beta: float = 1.0,
    gh_nodes: int = DEFAULT_GH_NODES,
    collect_cells: bool = False,
) -> list[GradientSignRow]:
    """For each (n, |U|), the fraction of (alpha, theta) cells where
    dW/dtheta < -1e-12 (central differences, one-sided at theta = 0).

    Scenarios use u_plus = |U|, u_minus = -|U| and a common beta.
    """
    n_values = list(n_values)
    u_abs_values = [float(u) for u in u_abs_values]
    alphas = np.array([_check_alpha(a) for a in alpha_grid])
    thetas = [float(t) for t in theta_grid]
    if not n_values or not u_abs_values:
        raise EmptyGrid("n_values and u_abs_values must be non-empty")
    if alphas.size == 0 or not thetas:
        raise EmptyGrid("alpha_grid and theta_grid must be non-empty")
    if any(u <= 0.0 for u in u_abs_values):
        raise ValueError("u_abs values must be > 0")
    if any(t < 0.0 or math.isnan(t) for t in thetas):
        raise ValueError("theta grid values must be >= 0")

    rows = []
    h = FD_STEP
    for n in n_values:
        for u_abs in u_abs_values:
            # delta plays no role in the gradient map; any interior value works.
            scn = WorstCaseScenario(n=n, u_minus=-u_abs, u_plus=u_abs, beta=beta, delta=0.5)
            noise = NoiseSpec(kind=noise_kind, theta=0.0, gh_nodes=gh_nodes)
            negative = 0
            cells = [] if collect_cells else None
            for theta in thetas:
                if theta >= h:
                    w_hi = _noisy_w_vector(scn, noise, alphas, theta + h)
                    w_lo = _noisy_w_vector(scn, noise, alphas, theta - h)
                    grad = (w_hi - w_lo) / (2.0 * h)
                else:
                    w_hi = _noisy_w_vector(scn, noise, alphas, theta + h)
                    w_lo = _noisy_w_vector(scn, noise, alphas, theta)
                    grad = (w_hi - w_lo) / h
                negative += int(np.sum(grad < NEGATIVE_GRADIENT_CUTOFF))
                if cells is not None:
                    cells.extend(
                        (float(a), theta, float(g)) for a, g in zip(alphas, grad)
                    )
            fraction = negative / (alphas.size * len(thetas))
            rows.append(
                GradientSignRow(
                    n=n,
                    u_abs=u_abs,
                    noise_kind=noise_kind,
                    fraction_negative=fraction,
                    cells=tuple(cells) if cells is not None else None,
                )
            )
    return rows


GRADMAP_CSV_HEADER = "n,u_abs,noise_kind,fraction_negative"
GRADMAP_CELLS_CSV_HEADER = "n,u_abs,noise_kind,alpha,theta,dw_dtheta"


def gradient_sign_map_to_csv(rows: list[GradientSignRow]) -> str:
    lines = [GRADMAP_CSV_HEADER]
    for row in rows:
        lines.append(
            f"{row.n},{fmt12(row.u_abs)},{row.noise_kind.value},{fmt12(row.fraction_negative)}"
        )
    return "\n".join(lines) + "\n"


def gradient_cells_to_csv(rows: list[GradientSignRow]) -> str:
    lines = [GRADMAP_CELLS_CSV_HEADER]
    for row in rows:
        if row.cells is None:
            continue
        for alpha, theta, grad in row.cells:
            lines.append(
                f"{row.n},{fmt12(row.u_abs)},{row.noise_kind.value},"
                f"{fmt12(alpha)},{fmt12(theta)},{fmt12(grad)}"
            )
    return "\n".join(lines) + "\n"
