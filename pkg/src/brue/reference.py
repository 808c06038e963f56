"""Closed-form reference values for the bundled example networks."""
from __future__ import annotations

import math


def n1_psi(mu: float, eps: float) -> float:
    """Worst-case social cost of N1 at belief ``mu``, valid for eps in [0, 1/10]."""
    return min(2.0, (12 + eps + 10 * eps**2 - 2 * mu + 4 * eps * mu) / (7 - 2 * mu))


def n1_contact(eps: float) -> float:
    """Lower posterior of the partially revealing N1 signal, for eps in [1/35, 4/45]."""
    return 1 - 2.5 * eps - 2.5 * math.sqrt(eps + eps**2)


N1_NO_REVELATION_UNTIL = 1 / 35
N1_FULL_REVELATION_FROM = 4 / 45


def _n2_mid(mu: float, eps: float) -> float:
    return (1.5 + mu + eps**2) / 2 + abs(0.5 - mu) * eps / 2


def n2_psi(mu: float, eps: float) -> float:
    """Worst-case social cost of N2 at belief ``mu`` (piecewise in eps)."""
    if eps <= 0.5:
        return _n2_mid(mu, eps)
    if eps <= 1.0:
        if mu <= eps - 0.5:
            return 1 + mu
        if mu <= 1.5 - eps:
            return _n2_mid(mu, eps)
        return 1.5
    if eps <= 1.5:
        if mu <= 1.5 - eps:
            return (1.5 + mu - (0.5 - mu) * eps + eps**2) / 2
        if mu <= eps - 0.5:
            return max(1.5, 1 + mu)
        return (1.5 + mu + (0.5 - mu) * eps + eps**2) / 2
    return max(1.5, 1 + mu)


N2_FULL_REVELATION = (math.sqrt(0.5), math.sqrt(1.5))


def chain_excess(n: int, d_prime: float, eta: float) -> tuple[float, float]:
    """Threshold and social-cost gap of the perturbed chain flow."""
    e = eta * d_prime
    return e, n * e + 2 * n * e**2


def chain_ratio(n: int, d_prime: float, eta: float) -> float:
    """Average excess time over threshold for the perturbed chain flow."""
    return (n + 2 * n * eta * d_prime) / (n * d_prime + 1 - d_prime)
