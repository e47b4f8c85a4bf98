"""Exception hierarchy shared by every qcpabe module."""


class QcpabeError(Exception):
    """Base class for all library errors."""


class IndexOutOfRange(QcpabeError, IndexError):
    pass


class LengthMismatch(QcpabeError, ValueError):
    pass


class CapacityExceeded(QcpabeError, ValueError):
    pass


class InvalidCode(QcpabeError, ValueError):
    pass


class DependentGenerators(InvalidCode):
    pass


class RepInSpan(InvalidCode):
    pass


class NotQualified(QcpabeError):
    """The attribute set (or qubit positions) cannot reconstruct the secret.

    This is an expected outcome for forbidden sets rather than a fault.
    """


class SharesConsumed(QcpabeError):
    """Quantum shares were already handed out and can not be granted again."""


class PolicySyntaxError(QcpabeError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ThresholdOutOfRange(QcpabeError, ValueError):
    pass


class UnknownAttribute(QcpabeError, ValueError):
    pass


class FieldTooSmall(QcpabeError, ValueError):
    pass


class DegenerateSeed(QcpabeError, ValueError):
    pass


class UnsupportedLength(QcpabeError, ValueError):
    pass


class InsufficientSiftedBits(QcpabeError):
    pass


class BB84Aborted(QcpabeError):
    def __init__(self, qber: float, result=None):
        super().__init__(f"BB84 aborted: qber={qber:.4f} above threshold")
        self.qber = qber
        self.result = result


class UnknownTag(QcpabeError, LookupError):
    pass


class CodeLengthMismatch(QcpabeError, ValueError):
    pass


class MessageTooLong(QcpabeError, ValueError):
    pass


class BundleAuthenticationError(QcpabeError):
    """The wrapped share bundle failed authentication under msk."""


class DuplicateTag(QcpabeError):
    pass


class NotFound(QcpabeError, LookupError):
    pass


class RecordFormatError(QcpabeError, ValueError):
    pass


class NonMonotoneTime(QcpabeError, ValueError):
    pass


class DuplicateAttribute(QcpabeError, ValueError):
    pass


class FutureStamp(QcpabeError, ValueError):
    pass


class UnknownRequest(QcpabeError, LookupError):
    pass
