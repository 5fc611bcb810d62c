"""Overflow-safe scalar arithmetic in sign / log-magnitude form.

Kernel values in this package range from ~exp(-3000) to ~exp(700) across the
sweep lattices, so plain floats are not a usable carrier.  A
:class:`ScaledValue` stores ``value = mantissa * exp(offset)`` with
``|mantissa|`` in ``[1/e, e]`` (or exactly 0), which keeps every intermediate
representable while staying cheap to combine.

Conversion back to float underflows silently to 0.0 -- far tails are
genuinely negligible -- but raises :class:`OverflowError` rather than return
``inf``, since an overflowing kernel value is always a bug upstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = ["ScaledValue", "EvalResult"]

# log of the largest double; to_float refuses anything beyond this
_LOG_MAX = 709.782712893384


def _normalized(mantissa: float, offset: float) -> tuple[float, float]:
    if mantissa == 0.0:
        return 0.0, 0.0
    if not (math.isfinite(mantissa) and math.isfinite(offset)):
        raise DomainError(
            f"non-finite scaled components: mantissa={mantissa!r} offset={offset!r}")
    la = math.log(abs(mantissa))
    shift = round(la)
    if shift == 0:
        return mantissa, offset
    return math.copysign(math.exp(la - shift), mantissa), offset + shift


@dataclass(frozen=True)
class ScaledValue:
    """A real number in the form ``mantissa * exp(offset)``.

    The constructor normalizes so that ``|mantissa|`` lies in ``[1/e, e]``
    unless the value is exactly zero (then both fields are 0.0).
    """

    mantissa: float
    offset: float

    def __post_init__(self):
        m, off = _normalized(self.mantissa, self.offset)
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "offset", off)

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_float(cls, x: float) -> "ScaledValue":
        if x == 0.0:
            return cls(0.0, 0.0)
        if not math.isfinite(x):
            raise DomainError(f"cannot represent {x!r} as a ScaledValue")
        return cls(x, 0.0)

    @classmethod
    def from_log(cls, log_magnitude: float, sign: float = 1.0) -> "ScaledValue":
        """Build ``sign * exp(log_magnitude)``; ``log_magnitude=-inf`` gives 0."""
        if sign == 0.0 or log_magnitude == -math.inf:
            return cls(0.0, 0.0)
        return cls(math.copysign(1.0, sign), log_magnitude)

    # -- accessors ---------------------------------------------------------

    @property
    def sign(self) -> float:
        """-1.0, 0.0 or 1.0."""
        if self.mantissa == 0.0:
            return 0.0
        return math.copysign(1.0, self.mantissa)

    @property
    def log_abs(self) -> float:
        """Natural log of |value| (``-inf`` for zero)."""
        if self.mantissa == 0.0:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.offset

    def to_float(self) -> float:
        """Nearest float.  Underflow returns 0.0; overflow raises."""
        if self.mantissa == 0.0:
            return 0.0
        la = self.log_abs
        if la > _LOG_MAX:
            raise OverflowError(
                f"scaled value exp({la:.6g}) does not fit in a float")
        if la < -745.0:
            return 0.0
        return self.mantissa * math.exp(self.offset)

    def __float__(self) -> float:
        return self.to_float()

    # -- arithmetic --------------------------------------------------------

    @staticmethod
    def _coerce(other) -> "ScaledValue":
        if isinstance(other, ScaledValue):
            return other
        if isinstance(other, (int, float)):
            return ScaledValue.from_float(float(other))
        return NotImplemented  # type: ignore[return-value]

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if self.mantissa == 0.0 or o.mantissa == 0.0:
            return ScaledValue(0.0, 0.0)
        return ScaledValue(self.mantissa * o.mantissa, self.offset + o.offset)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o.mantissa == 0.0:
            raise ZeroDivisionError("division by zero ScaledValue")
        if self.mantissa == 0.0:
            return ScaledValue(0.0, 0.0)
        return ScaledValue(self.mantissa / o.mantissa, self.offset - o.offset)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o / self

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if self.mantissa == 0.0:
            return o
        if o.mantissa == 0.0:
            return self
        la, lb = self.log_abs, o.log_abs
        m = max(la, lb)
        s = self.sign * math.exp(la - m) + o.sign * math.exp(lb - m)
        if s == 0.0:
            return ScaledValue(0.0, 0.0)
        return ScaledValue.from_log(m + math.log(abs(s)), math.copysign(1.0, s))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o + (-self)

    def __neg__(self) -> "ScaledValue":
        if self.mantissa == 0.0:
            return self
        return ScaledValue(-self.mantissa, self.offset)

    def __abs__(self) -> "ScaledValue":
        if self.mantissa < 0.0:
            return -self
        return self

    # -- comparisons -------------------------------------------------------

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is NotImplemented:
            raise TypeError(f"cannot compare ScaledValue with {type(other)!r}")
        sa, sb = self.sign, o.sign
        if sa != sb:
            return -1 if sa < sb else 1
        if sa == 0.0:
            return 0
        la, lb = self.log_abs, o.log_abs
        if la == lb:
            return 0
        # for negative values a larger magnitude means a smaller number
        bigger_mag = 1 if la > lb else -1
        return bigger_mag if sa > 0 else -bigger_mag

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if not isinstance(other, (ScaledValue, int, float)):
            return NotImplemented
        return self._cmp(other) == 0

    def __hash__(self):
        return hash((self.mantissa, self.offset))

    # -- formatting --------------------------------------------------------

    def format_scientific(self, digits: int = 12) -> str:
        """Decimal scientific notation valid far outside float range."""
        if self.mantissa == 0.0:
            return "0.0"
        log10 = self.log_abs / math.log(10.0)
        e10 = math.floor(log10)
        frac = 10.0 ** (log10 - e10)
        # rounding may push the fraction to 10.0
        if frac >= 10.0 - 0.5 * 10.0 ** (1 - digits):
            frac /= 10.0
            e10 += 1
        s = "-" if self.mantissa < 0 else ""
        return f"{s}{frac:.{digits - 1}f}e{e10:+03d}"

    def __repr__(self):
        return f"ScaledValue({self.format_scientific(9)})"


@dataclass(frozen=True)
class EvalResult:
    """A scaled value together with its estimated relative error."""

    value: ScaledValue
    rel_err: float

    @property
    def abs_err_estimate(self) -> float:
        """Estimated absolute error; saturates to ``inf`` instead of raising."""
        if self.value.mantissa == 0.0:
            return 0.0
        la = self.value.log_abs + math.log(max(self.rel_err, 5e-324))
        if la > _LOG_MAX:
            return math.inf
        if la < -745.0:
            return 0.0
        return math.exp(la)

    def __repr__(self):
        return (f"EvalResult({self.value.format_scientific(12)}"
                f" ± {self.rel_err:.2e} rel)")
