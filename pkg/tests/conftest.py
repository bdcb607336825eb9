"""Shared test oracles and the acceptance-criteria summary hook.

Oracles here are computed independently of the library code under test:
exact rational arithmetic where possible, classical series otherwise.
"""

from __future__ import annotations

import math
from fractions import Fraction

# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------


def euler_gamma_oracle() -> float:
    """Euler-Mascheroni constant from the harmonic series.

    H_N - ln N - 1/(2N) + 1/(12 N^2) has error O(N^-4); N = 10^6 puts
    that far below double precision.
    """
    big_n = 10**6
    harmonic = math.fsum(1.0 / i for i in range(1, big_n + 1))
    return harmonic - math.log(big_n) - 0.5 / big_n + 1.0 / (12.0 * big_n**2)


def digamma_int_oracle(n: int, gamma: float) -> float:
    """psi(n) = -gamma + H_{n-1} for integer n, harmonic part exact."""
    return float(Fraction(0) + sum(Fraction(1, i) for i in range(1, n))) - gamma


def inc_beta_half_oracle(a: int, b: int) -> Fraction:
    """I_{1/2}(a, b) as an exact rational binomial tail sum."""
    m = a + b - 1
    return sum(Fraction(math.comb(m, j), 2**m) for j in range(a, m + 1))


def inc_beta_binomial_oracle(x: Fraction, a: int, b: int) -> Fraction:
    """I_x(a, b) for integer a, b at rational x, exact."""
    m = a + b - 1
    return sum(
        Fraction(math.comb(m, j)) * x**j * (1 - x) ** (m - j) for j in range(a, m + 1)
    )


# ---------------------------------------------------------------------------
# Acceptance criteria reporting
# ---------------------------------------------------------------------------

_ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def record_criterion(number: int, title: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE.append((number, title, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number:2d} {status}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
