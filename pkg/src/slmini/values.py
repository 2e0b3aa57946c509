"""Runtime values: 64-bit signed integers, 64-bit floats, array handles.

Integer arithmetic wraps to 64-bit two's complement; division and modulo
truncate toward zero like C.
"""

from __future__ import annotations

from .errors import E_BOUNDS, E_DIV_ZERO, E_TYPE, MachineError

INT_MIN = -(1 << 63)
INT_MAX = (1 << 63) - 1
_WRAP = 1 << 64


class ArrayValue:
    """A fixed-size array of int or float cells, shared by handle."""

    __slots__ = ("aid", "value_class", "cells")

    def __init__(self, aid: int, value_class: str, size: int):
        self.aid = aid
        self.value_class = value_class
        self.cells = [0.0] * size if value_class == "floatScalar" else [0] * size

    def load(self, index):
        if not isinstance(index, int):
            raise MachineError(E_TYPE, "array index must be an integer")
        if not 0 <= index < len(self.cells):
            raise MachineError(E_BOUNDS, f"index {index} out of range for array of {len(self.cells)}")
        return self.cells[index]

    def store(self, index, value) -> None:
        if not isinstance(index, int):
            raise MachineError(E_TYPE, "array index must be an integer")
        if not 0 <= index < len(self.cells):
            raise MachineError(E_BOUNDS, f"index {index} out of range for array of {len(self.cells)}")
        if self.value_class == "floatScalar":
            self.cells[index] = float(value) if isinstance(value, int) else _want_float(value)
        else:
            self.cells[index] = _want_int(value)

    def __repr__(self) -> str:
        return f"a{self.aid}"


def wrap_int(v: int) -> int:
    if INT_MIN <= v <= INT_MAX:
        return v
    v &= _WRAP - 1
    return v - _WRAP if v > INT_MAX else v


def _want_int(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise MachineError(E_TYPE, f"expected an integer, got {type(v).__name__}")
    return v


def _want_float(v):
    if not isinstance(v, float):
        raise MachineError(E_TYPE, f"expected a float, got {type(v).__name__}")
    return v


def truthy(v) -> bool:
    if isinstance(v, (int, float)):
        return v != 0
    raise MachineError(E_TYPE, "condition must be a scalar")


def binop(op: str, a, b):
    if isinstance(a, ArrayValue) or isinstance(b, ArrayValue):
        raise MachineError(E_TYPE, f"array handle used in {op!r}")
    if op == "+":
        r = a + b
    elif op == "-":
        r = a - b
    elif op == "*":
        r = a * b
    elif op == "/":
        if b == 0:
            raise MachineError(E_DIV_ZERO, "division by zero")
        if isinstance(a, int) and isinstance(b, int):
            q = abs(a) // abs(b)
            return wrap_int(q if (a < 0) == (b < 0) else -q)
        return a / b
    elif op == "%":
        if not (isinstance(a, int) and isinstance(b, int)):
            raise MachineError(E_TYPE, "modulo needs integer operands")
        if b == 0:
            raise MachineError(E_DIV_ZERO, "modulo by zero")
        q = abs(a) // abs(b)
        q = q if (a < 0) == (b < 0) else -q
        return wrap_int(a - q * b)
    elif op == "<":
        return int(a < b)
    elif op == "<=":
        return int(a <= b)
    elif op == ">":
        return int(a > b)
    elif op == ">=":
        return int(a >= b)
    elif op == "==":
        return int(a == b)
    elif op == "!=":
        return int(a != b)
    else:
        raise AssertionError(f"unknown binary operator {op!r}")
    if isinstance(r, int):
        return wrap_int(r)
    return r


def unop(op: str, a):
    if isinstance(a, ArrayValue):
        raise MachineError(E_TYPE, f"array handle used in {op!r}")
    if op == "-":
        return wrap_int(-a) if isinstance(a, int) else -a
    if op == "!":
        return int(a == 0)
    if op == "bool":
        return int(a != 0)
    raise AssertionError(f"unknown unary operator {op!r}")


def coerce_channel(value_class: str, v):
    """Check/convert a value crossing a channel of the given class."""
    if value_class == "integerScalar":
        if isinstance(v, int) and not isinstance(v, bool):
            return v
        raise MachineError(E_TYPE, "integer channel fed a non-integer value")
    if value_class == "floatScalar":
        if isinstance(v, float):
            return v
        if isinstance(v, int) and not isinstance(v, bool):
            return float(v)
        raise MachineError(E_TYPE, "float channel fed a non-float value")
    if value_class == "arrayHandle":
        if isinstance(v, ArrayValue):
            return v
        raise MachineError(E_TYPE, "array-handle channel fed a non-array value")
    raise AssertionError(f"unknown value class {value_class!r}")


def fmt_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return repr(v) if isinstance(v, ArrayValue) else str(v)
