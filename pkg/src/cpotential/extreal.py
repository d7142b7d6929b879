"""Extended-real helpers.

Values in [-inf, +inf] are plain Python floats (``math.inf`` / ``-math.inf``).
The helpers below make the two conventions that floats get wrong explicit:
``(+inf) + (-inf)`` is an error rather than ``nan``, and an empty sup/inf
returns ``-inf``/``+inf``.
"""

import math
from typing import Iterable

POS_INF = math.inf
NEG_INF = -math.inf


class UndefinedSumError(ArithmeticError):
    """Raised for the forbidden sum (+inf) + (-inf)."""


def is_finite(v: float) -> bool:
    return math.isfinite(v)


def ext_add(a: float, b: float) -> float:
    if (a == POS_INF and b == NEG_INF) or (a == NEG_INF and b == POS_INF):
        raise UndefinedSumError("(+inf) + (-inf) is undefined")
    return a + b


def ext_sub(a: float, b: float) -> float:
    return ext_add(a, -b)


def ext_sup(values: Iterable[float]) -> float:
    """Supremum with ``sup of nothing = -inf``."""
    return max(values, default=NEG_INF)


def ext_inf(values: Iterable[float]) -> float:
    """Infimum with ``inf of nothing = +inf``."""
    return min(values, default=POS_INF)


def format_ext(v: float):
    """JSON-friendly form: finite floats stay numbers, infinities become strings."""
    if v == POS_INF:
        return "+inf"
    if v == NEG_INF:
        return "-inf"
    if isinstance(v, float) and math.isnan(v):
        raise ValueError("nan is not an extended real")
    return float(v)


def parse_ext(v) -> float:
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("+inf", "inf", "+infinity", "infinity"):
            return POS_INF
        if s in ("-inf", "-infinity"):
            return NEG_INF
        out = float(s)
    else:
        out = float(v)
    if math.isnan(out):
        raise ValueError(f"not an extended real: {v!r}")
    return out
