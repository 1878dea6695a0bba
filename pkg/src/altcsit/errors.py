"""Exception types shared across the package."""

from __future__ import annotations


class AltCsitError(Exception):
    """Base class for all package errors."""


class PmfError(AltCsitError, ValueError):
    """Invalid state probability mass function."""


class SumNotOne(PmfError):
    pass


class AsymmetricPmf(PmfError):
    pass


class NegativeMass(PmfError):
    pass


class ZeroChannel(AltCsitError, ValueError):
    pass


class LengthMismatch(AltCsitError, ValueError):
    pass


class InvalidParameter(AltCsitError, ValueError):
    pass


class CsitViolation(AltCsitError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(f"{len(self.violations)} CSIT violation(s): {self.violations[:3]}")


class NotDecodable(AltCsitError):
    pass


class BadGroup(AltCsitError, ValueError):
    pass


class GridTooSmall(AltCsitError, ValueError):
    pass


class OutOfRange(AltCsitError, ValueError):
    pass


class UnsupportedState(AltCsitError, ValueError):
    pass


class TargetNotApplicable(AltCsitError, ValueError):
    pass


class PointOutsideRegion(AltCsitError, ValueError):
    pass
