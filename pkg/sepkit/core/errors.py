"""
Exceptions raised by sepkit.

Every error carries the exit code the command line returns for it: 1 for I/O problems,
2 for invalid input or parameters, 3 when a bound is vacuous and there is nothing to verify.
"""

from __future__ import annotations


class SepkitError(Exception):
    exit_code: int = 2

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class InputError(SepkitError):
    exit_code = 1


class ValidationError(SepkitError):
    exit_code = 2


class VacuousBound(SepkitError):
    exit_code = 3

    def __init__(self, theorem: str, bound: float):
        self.theorem = theorem
        self.bound = bound
        super().__init__(
            f"The {theorem} bound evaluates to {bound:.6g} <= 0, there is nothing to verify."
        )


# dataset


class MissingFile(InputError):
    def __init__(self, path):
        self.path = path
        super().__init__(f"File {path} does not exist.")


class RaggedRows(ValidationError):
    def __init__(self, row: int, expected: int, found: int):
        self.row = row
        super().__init__(f"Row {row} has {found} columns, expected {expected}.")


class NonNumericCell(ValidationError):
    def __init__(self, row: int, column: str, value: str):
        self.row = row
        self.column = column
        super().__init__(f"Row {row}, column {column!r}: {value!r} is not a finite number.")


class UnknownLabelColumn(ValidationError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"Label column {column!r} is not in the header.")


class NoLabels(ValidationError):
    def __init__(self):
        super().__init__("The dataset has no labels.")


# preprocess


class ZeroVarianceFeature(ValidationError):
    def __init__(self, index: int, name: str | None = None):
        self.index = index
        self.name = name
        label = f"{name!r} (index {index})" if name else f"index {index}"
        super().__init__(f"Feature {label} has zero variance.")


class DegenerateCovariance(ValidationError):
    def __init__(self):
        super().__init__("No eigenvalue of the correlation matrix passed the selection rule.")


class DimensionMismatch(ValidationError):
    def __init__(self, expected: int, found: int):
        self.expected = expected
        self.found = found
        super().__init__(f"Expected dimension {expected}, got {found}.")


class ZeroVectorOnSphere(ValidationError):
    def __init__(self, row: int | None = None):
        self.row = row
        where = "" if row is None else f" (row {row})"
        super().__init__(f"Cannot project the zero vector onto the unit sphere{where}.")


# separability


class ZeroAlpha(ValidationError):
    def __init__(self):
        super().__init__("alpha must be positive for the excluded ball.")


class EmptyEligibleSet(ValidationError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"Point {index} has no eligible points to compare against.")


class EmptyAlphas(ValidationError):
    def __init__(self):
        super().__init__("At least one alpha is required.")


class InvalidAlpha(ValidationError):
    def __init__(self, alpha: float, allowed: str = "(0, 1]"):
        self.alpha = alpha
        super().__init__(f"alpha={alpha!r} is outside {allowed}.")


# baselines


class UnsupportedDimension(ValidationError):
    def __init__(self, n: float, minimum: int):
        self.n = n
        super().__init__(f"Dimension n={n} is not supported, n must be at least {minimum}.")


class ParamOutOfRange(ValidationError):
    def __init__(self, inequality: str, **values: float):
        self.inequality = inequality
        self.values = values
        given = ", ".join(f"{k}={v!r}" for k, v in values.items())
        super().__init__(f"Parameter check {inequality} failed ({given}).")


class DeltaOutOfRange(ParamOutOfRange):
    pass


class OutOfRange(ValidationError):
    pass


# montecarlo


class InvalidSpec(ValidationError):
    pass


# corrector


class DegenerateErrorCentroid(ValidationError):
    def __init__(self, norm: float):
        self.norm = norm
        super().__init__(f"The whitened error centroid has norm {norm:.3g}, no direction exists.")


class InsufficientCloud(ValidationError):
    def __init__(self, points: int, components: int):
        super().__init__(
            f"The correct cloud has {points} points, at least {components + 1} are needed."
        )


class EmptyCascade(ValidationError):
    def __init__(self):
        super().__init__("The cascade has no corrector.")


class EmptyHoldout(ValidationError):
    def __init__(self, which: str):
        self.which = which
        super().__init__(f"The {which} holdout set is empty.")
