"""
Parsing of numeric lists given on the command line.

``0.8,0.9,0.95`` is an explicit list, ``0.8:0.99:0.01`` an inclusive range of reals and
``8..25`` an inclusive range of integers.
"""

from __future__ import annotations

import math

from sepkit.core.errors import ValidationError

RANGE_TOLERANCE = 1e-9


def real_range(start: float, stop: float, step: float) -> list[float]:
    if step <= 0 or not all(math.isfinite(x) for x in (start, stop, step)):
        raise ValidationError(f"Invalid range {start}:{stop}:{step}, step must be positive.")
    if stop < start:
        raise ValidationError(f"Invalid range {start}:{stop}:{step}, stop is below start.")
    count = math.floor((stop - start) / step + RANGE_TOLERANCE)
    values = [start + i * step for i in range(count + 1)]
    # rounding the arithmetic drift keeps 0.8 + 19*0.01 printable as 0.99
    values = [float(f"{x:.12g}") for x in values]
    if abs(values[-1] - stop) <= RANGE_TOLERANCE * max(1.0, abs(stop)):
        values[-1] = stop
    return values


def parse_reals(text: str) -> list[float]:
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValidationError(f"Expected start:stop:step, got {text!r}.")
            start, stop, step = (float(x) for x in parts)
            return real_range(start, stop, step)
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"Cannot read a list of numbers from {text!r}.") from None


def parse_ints(text: str) -> list[int]:
    text = text.strip()
    try:
        if ".." in text:
            start, stop = (int(x) for x in text.split(".."))
            if stop < start:
                raise ValidationError(f"Invalid range {text!r}, stop is below start.")
            return list(range(start, stop + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"Cannot read a list of integers from {text!r}.") from None
