"""Exception hierarchy shared by every pipeline stage.

Each error carries a ``category`` used by the CLI to pick an exit code and by
the HTTP service to pick a status code:

* ``schema``  — malformed or contract-violating input (CLI exit 2, HTTP 422)
* ``data``    — structurally valid input that is degenerate for the requested
  operation (CLI exit 3, HTTP 422)
* ``numeric`` — numerical infeasibility or failure (CLI exit 4, HTTP 422)
"""

from __future__ import annotations


class FeatkitError(Exception):
    category = "data"

    @property
    def name(self) -> str:
        return type(self).__name__


# -- schema errors ----------------------------------------------------------

class MissingColumn(FeatkitError):
    category = "schema"


class DuplicateTimepoint(FeatkitError):
    category = "schema"


class NonNumericValue(FeatkitError):
    category = "schema"


class UnlabeledSeries(FeatkitError):
    category = "schema"


class EmptySeries(FeatkitError):
    category = "schema"


class LengthMismatch(FeatkitError):
    category = "schema"


class EmptyInput(FeatkitError):
    category = "schema"


class OutOfRange(FeatkitError):
    category = "schema"


# -- data degeneracy --------------------------------------------------------

class ConstantSeries(FeatkitError):
    pass


class EmptyRegistry(FeatkitError):
    pass


class EmptyTable(FeatkitError):
    pass


class DegenerateScale(FeatkitError):
    pass


class NaNInput(FeatkitError):
    pass


class TooFewItems(FeatkitError):
    pass


class InsufficientData(FeatkitError):
    pass


class ZeroVarianceColumn(FeatkitError):
    pass


class ClassTooSmall(FeatkitError):
    pass


class NoSurvivingFeatures(FeatkitError):
    pass


class TooFewClasses(FeatkitError):
    pass


class MulticlassWithTwoSampleTest(FeatkitError):
    pass


# -- numerical failures -----------------------------------------------------

class PerplexityInfeasible(FeatkitError):
    category = "numeric"


class DegenerateNull(FeatkitError):
    category = "numeric"
