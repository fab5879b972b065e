"""Shot-allocation rules for the CANS family and the Adam variants.

All rules take bias-corrected moving averages ``chi`` (gradient) and ``xi``
(single-shot variance) as stand-ins for the unknown gradient and noise, and
return an integer shot count per gradient component.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

SHOT_CAP = 10**6
CANS_MIN_SHOTS = 2
TINY = 1e-24


class AllocationError(ValueError):
    pass


class EmaTracker:
    """Bias-corrected exponential moving averages of gradient and variance estimates.

    Raw accumulators are kept untouched; the corrected values are derived on read.
    """

    def __init__(self, d: int, mu: float):
        if not 0 < mu < 1:
            raise ValueError("mu must lie in (0, 1)")
        self.mu = mu
        self.chi_raw = np.zeros(d)
        self.xi_raw = np.zeros(d)
        self.k = 0

    def update(self, g: np.ndarray, S: np.ndarray) -> None:
        self.chi_raw = self.mu * self.chi_raw + (1 - self.mu) * np.asarray(g, dtype=float)
        self.xi_raw = self.mu * self.xi_raw + (1 - self.mu) * np.asarray(S, dtype=float)
        self.k += 1

    def _correction(self) -> float:
        return 1.0 - self.mu**self.k if self.k else 1.0

    @property
    def chi(self) -> np.ndarray:
        return self.chi_raw / self._correction()

    @property
    def xi(self) -> np.ndarray:
        return np.maximum(self.xi_raw, 0.0) / self._correction()


class ScalarEma:
    """Bias-corrected running average of a vector (used for the shot history)."""

    def __init__(self, initial: np.ndarray, mu: float):
        self.mu = mu
        self.raw = np.zeros_like(np.asarray(initial, dtype=float))
        self.k = 0
        self._initial = np.asarray(initial, dtype=float)

    def update(self, x: np.ndarray) -> None:
        self.raw = self.mu * self.raw + (1 - self.mu) * np.asarray(x, dtype=float)
        self.k += 1

    @property
    def value(self) -> np.ndarray:
        if self.k == 0:
            return self._initial
        return self.raw / (1.0 - self.mu**self.k)


def _check_step(L: float, alpha: float) -> None:
    if L <= 0 or alpha <= 0:
        raise AllocationError("L and alpha must be positive")
    if alpha * L >= 2:
        raise AllocationError(f"step size {alpha} violates alpha < 2/L = {2 / L}")


def finalize(raw: np.ndarray, floor: int) -> np.ndarray:
    """Ceil, then clamp to ``[floor, SHOT_CAP]``; non-finite values go to the cap."""
    raw = np.asarray(raw, dtype=float)
    raw = np.where(np.isnan(raw), floor, raw)
    raw = np.minimum(raw, SHOT_CAP)
    return np.clip(np.ceil(raw), floor, SHOT_CAP).astype(np.int64)


def expected_component_gain(chi, xi, s, L, alpha) -> np.ndarray:
    """``E[G_i(s_i)] = (alpha - L alpha^2 / 2) chi_i^2 - (L alpha^2 / 2) xi_i / s_i``."""
    chi, xi, s = (np.asarray(a, dtype=float) for a in (chi, xi, s))
    return (alpha - L * alpha**2 / 2) * chi**2 - (L * alpha**2 / 2) * xi / s


def _clip_to_best(s: np.ndarray, rate: np.ndarray) -> np.ndarray:
    # argmax returns the lowest index on ties
    return np.minimum(s, s[int(np.argmax(rate))])


def _snr_terms(chi, xi, L, alpha) -> tuple[float, np.ndarray]:
    # a = L alpha / (2 - L alpha), q = xi / chi^2 (shared so the R=0 limits agree bit for bit)
    a = L * alpha / (2 - L * alpha)
    q = np.maximum(np.asarray(xi, dtype=float), 0.0) / np.maximum(
        np.asarray(chi, dtype=float) ** 2, TINY
    )
    return a, q


def icans_raw(chi, xi, L, alpha) -> np.ndarray:
    a, q = _snr_terms(chi, xi, L, alpha)
    return 2 * (a * q)


def icans_shots(chi, xi, L: float, alpha: float, clip: bool = True) -> np.ndarray:
    """Individual-component rule: maximize each ``E[G_i] / s_i`` separately.

    With ``clip`` every count is capped at the count of the component with the
    best expected gain per shot.
    """
    _check_step(L, alpha)
    s = finalize(icans_raw(chi, xi, L, alpha), CANS_MIN_SHOTS)
    if clip:
        s = _clip_to_best(s, expected_component_gain(chi, xi, s, L, alpha) / s)
    return s


def gcans_raw(chi, xi, L, alpha) -> np.ndarray:
    sigma = np.sqrt(np.maximum(np.asarray(xi, dtype=float), 0.0))
    norm2 = max(float(np.sum(np.asarray(chi, dtype=float) ** 2)), TINY)
    return (2 * L * alpha / (2 - L * alpha)) * sigma * sigma.sum() / norm2


def gcans_shots(chi, xi, L: float, alpha: float) -> np.ndarray:
    """Global rule: maximize ``E[G] / sum_i s_i``, giving ``s_i`` proportional to ``sigma_i``."""
    _check_step(L, alpha)
    return finalize(gcans_raw(chi, xi, L, alpha), CANS_MIN_SHOTS)


def wecans_i_raw(chi, xi, L, alpha, R_i) -> np.ndarray:
    # a q + sqrt((a q)^2 + a q R) equals the closed form
    # a q (1 + sqrt(1 + R chi^2 / (a xi))) without dividing by xi
    a, q = _snr_terms(chi, xi, L, alpha)
    R_i = np.broadcast_to(np.asarray(R_i, dtype=float), q.shape)
    aq = a * q
    return aq + np.sqrt(aq * aq + aq * R_i)


def wecans_i_shots(chi, xi, L: float, alpha: float, R_i, clip: bool = True) -> np.ndarray:
    """Latency-aware individual rule: maximize ``E[G_i] / (s_i + R_i)`` per component."""
    _check_step(L, alpha)
    R_i = np.broadcast_to(np.asarray(R_i, dtype=float), np.shape(chi))
    if np.any(R_i < 0):
        raise AllocationError("overhead ratios must be nonnegative")
    s = finalize(wecans_i_raw(chi, xi, L, alpha, R_i), CANS_MIN_SHOTS)
    if clip:
        s = _clip_to_best(s, expected_component_gain(chi, xi, s, L, alpha) / (s + R_i))
    return s


def wecans_g_raw(chi, xi, L, alpha, R) -> np.ndarray:
    # sigma_i R / (sqrt(S^2 + x) - S) rewritten as sigma_i R (sqrt(S^2 + x) + S) / x
    # with x = R (2 - L alpha) / (L alpha) |chi|^2
    sigma = np.sqrt(np.maximum(np.asarray(xi, dtype=float), 0.0))
    total = sigma.sum()
    norm2 = max(float(np.sum(np.asarray(chi, dtype=float) ** 2)), TINY)
    ratio = (2 - L * alpha) / (L * alpha)
    return sigma * (np.sqrt(total**2 + R * ratio * norm2) + total) / (ratio * norm2)


def wecans_g_shots(chi, xi, L: float, alpha: float, R: float) -> np.ndarray:
    """Latency-aware global rule: maximize ``E[G] / (sum_i s_i + R)``."""
    _check_step(L, alpha)
    if R < 0:
        raise AllocationError("overhead ratio must be nonnegative")
    if R == 0:
        return gcans_shots(chi, xi, L, alpha)
    return finalize(wecans_g_raw(chi, xi, L, alpha, R), CANS_MIN_SHOTS)


def adam_direction(g, m_raw, v_raw, beta1, beta2, eps, k) -> np.ndarray:
    """Bias-corrected Adam direction ``X(g)`` that gradient ``g`` would produce at step ``k``.

    With ``eps = 0`` components whose second moment is zero get ``X_i = 0``.
    """
    g = np.asarray(g, dtype=float)
    M = (beta1 * m_raw + (1 - beta1) * g) / (1 - beta1**k)
    V = (beta2 * v_raw + (1 - beta2) * g * g) / (1 - beta2**k)
    D = np.sqrt(V) + eps
    return np.divide(M, D, out=np.zeros_like(M), where=D > 0)


def clip_alpha(chi, X, L: float, alpha: float, r: float) -> tuple[float, bool]:
    """Step size for shot computation, ``min(alpha, r * 2|chi.X| / (L |X|^2))``."""
    if not 0 < r < 1:
        raise AllocationError("clipping rate r must lie in (0, 1)")
    X = np.asarray(X, dtype=float)
    norm2 = float(X @ X)
    if norm2 == 0:
        return alpha, False
    bound = 2 * abs(float(np.asarray(chi, dtype=float) @ X)) / (L * norm2)
    if r * bound < alpha:
        return r * bound, True
    return alpha, False


def adam_gain_terms(
    chi,
    xi,
    m_raw,
    v_raw,
    alpha: float,
    L: float,
    eps: float,
    beta1: float,
    beta2: float,
    k: int,
) -> tuple[float, np.ndarray]:
    """Second-order expansion ``E[phi] ~ A - sum_i B_i / s_i`` of the Adam gain bound.

    ``phi(g) = |alpha chi.X(g)| - (L alpha^2 / 2) |X(g)|^2`` and ``A = phi(chi)``;
    ``B_i = -(xi_i / 2) d^2 phi / d g_i^2`` at ``g = chi`` by central differences
    with the sign of ``chi.X`` frozen. Only ``X_i`` depends on ``g_i``, so each
    second difference is taken on that component's own contribution.

    The shot rule is derived with ``eps`` neglected (pass ``eps=0``). Then a
    component with zero second moment at ``chi`` has ``X_i ~ sign(g_i)``, a kink
    the expansion cannot describe, and gets ``B_i = 0`` (it falls to ``s_min``).
    """
    if k < 1:
        raise AllocationError("iteration index k must be >= 1")
    chi = np.asarray(chi, dtype=float)
    xi = np.asarray(xi, dtype=float)
    X0 = adam_direction(chi, m_raw, v_raw, beta1, beta2, eps, k)
    dot = float(chi @ X0)
    A = abs(alpha * dot) - L * alpha**2 / 2 * float(X0 @ X0)
    sign = 1.0 if dot >= 0 else -1.0

    h = 1e-3 * np.maximum(np.abs(chi), 1e-6)

    def part(x: np.ndarray) -> np.ndarray:
        return sign * alpha * chi * x - L * alpha**2 / 2 * x * x

    Xp = adam_direction(chi + h, m_raw, v_raw, beta1, beta2, eps, k)
    Xm = adam_direction(chi - h, m_raw, v_raw, beta1, beta2, eps, k)
    second = (part(Xp) - 2 * part(X0) + part(Xm)) / (h * h)
    B = -0.5 * xi * second
    V0 = beta2 * np.asarray(v_raw, dtype=float) + (1 - beta2) * chi * chi
    B = np.where((xi == 0) | ((V0 == 0) & (eps == 0)), 0.0, B)
    return A, B


def we_adam_raw(A: float, B, R: float, s_min: int) -> np.ndarray:
    B = np.asarray(B, dtype=float)
    pos = B > 0
    neg = ~pos
    raw = np.full(B.shape, float(s_min))
    if not pos.any():
        return raw
    R_eff = R + neg.sum() * s_min
    A_eff = A - B[neg].sum() / s_min
    root_b = np.sqrt(B[pos])
    b_plus = root_b.sum()
    # R' sqrt(B_i) / (sqrt(b+^2 + R' A') - b+) == sqrt(B_i) (sqrt(b+^2 + R' A') + b+) / A'
    raw[pos] = root_b * (np.sqrt(b_plus**2 + R_eff * A_eff) + b_plus) / A_eff
    return raw


def we_adam_shots(A: float, B, R: float, s_min: int) -> np.ndarray:
    """Maximize ``(A - sum B_i / s_i) / (sum s_i + R)`` subject to ``s_i >= s_min``.

    Components with ``B_i <= 0`` sit at ``s_min``. With ``R = 0`` and all
    ``B_i > 0`` this is ``2 sqrt(B_i) sum_j sqrt(B_j) / A``.
    """
    if not A > 0:
        raise AllocationError("A must be positive; reduce the step size used for shots")
    if s_min < 2:
        raise AllocationError("s_min must be at least 2")
    if R < 0:
        raise AllocationError("overhead ratio must be nonnegative")
    return finalize(we_adam_raw(A, B, R, s_min), s_min)
