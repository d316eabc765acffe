"""Paired t-test with a self-contained Student-t tail probability.

The two-tailed p-value comes from the regularized incomplete beta function:
for t with df degrees of freedom, p = I_x(df/2, 1/2) at x = df / (df + t^2).
I_x is evaluated with the standard continued-fraction expansion (modified
Lentz iteration), which converges to well below 1e-10 across the parameter
range used here, so no statistics library is needed at runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateVarianceError, ValidationError

_FPMIN = 1e-300
_EPS = 3e-14


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta integral (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        coeff = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + coeff * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + coeff / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        coeff = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + coeff * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + coeff / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0.0 or b <= 0.0:
        raise ValidationError(f"beta parameters must be positive, got a={a}, b={b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # Use the expansion on whichever side converges fast, mirror for the other.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_two_tailed_p(t: float, df: int) -> float:
    """Two-tailed p-value for a t statistic with df degrees of freedom."""
    if df < 1:
        raise ValidationError(f"degrees of freedom must be >= 1, got {df}")
    x = df / (df + t * t)
    p = regularized_incomplete_beta(df / 2.0, 0.5, x)
    return min(max(p, 0.0), 1.0)


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    p: float


def paired_t_test(a: list[float], b: list[float]) -> TTestResult:
    """Two-tailed paired t-test of a against b.

    Identical inputs (all differences zero) are the no-effect case and return
    t = 0, p = 1.  Differences that are identical but nonzero have zero
    variance with a nonzero mean, which leaves the statistic undefined; that
    raises DegenerateVarianceError rather than fabricating a value.
    """
    if len(a) != len(b):
        raise ValidationError(f"paired samples differ in length: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise ValidationError(f"paired t-test needs at least 2 pairs, got {len(a)}")
    diffs = [x - y for x, y in zip(a, b)]
    count = len(diffs)
    mean = math.fsum(diffs) / count
    variance = math.fsum((d - mean) ** 2 for d in diffs) / (count - 1)
    df = count - 1
    if variance == 0.0:
        if mean == 0.0:
            return TTestResult(t=0.0, df=df, p=1.0)
        raise DegenerateVarianceError(
            f"paired differences are all {diffs[0]}; t statistic undefined"
        )
    t = mean / math.sqrt(variance / count)
    return TTestResult(t=t, df=df, p=student_t_two_tailed_p(t, df))
