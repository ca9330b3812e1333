from fractions import Fraction
from typing import Union


def choose_next_alpha(alpha: Fraction, nu: Union[Fraction, float], min_denominator: int) -> Fraction:
    """
    α̂ = α + 1/(k·q) para o menor k com q·k ≥ min_denominator e 1/(k·q) < ν.
    Se a redução baixar o denominador abaixo do mínimo, k é incrementado.
    """
    if nu <= 0:
        raise ValueError(f"nu deve ser positivo: {nu}")
    if min_denominator < 1:
        raise ValueError(f"min_denominator deve ser positivo: {min_denominator}")

    alpha = Fraction(alpha)
    nu = nu if isinstance(nu, Fraction) else Fraction(repr(float(nu)))
    q = alpha.denominator

    k = max(1, -(-min_denominator // q))
    while Fraction(1, k * q) >= nu:
        k = max(k + 1, int(1 / (nu * q)))

    while True:
        candidate = alpha + Fraction(1, k * q)
        if candidate.denominator >= min_denominator and Fraction(1, k * q) < nu:
            return candidate
        k += 1


def alpha_step(alpha: Fraction, alpha_hat: Fraction) -> int:
    """k tal que α̂ = α + 1/(k·q)."""
    k = 1 / ((Fraction(alpha_hat) - Fraction(alpha)) * Fraction(alpha).denominator)
    if k.denominator != 1 or k < 1:
        raise ValueError(f"{alpha_hat} não é da forma {alpha} + 1/(k·q)")
    return int(k)
