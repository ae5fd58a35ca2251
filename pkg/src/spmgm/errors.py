"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit code 2); failures
raised while an algorithm runs derive from :class:`AlgorithmError` (exit 3).
"""

from __future__ import annotations


class SpmgmError(Exception):
    pass


class InputError(SpmgmError, ValueError):
    pass


class AlgorithmError(SpmgmError, RuntimeError):
    pass


# graph core
class InvalidSimilarity(InputError):
    pass


class IsolatedNode(AlgorithmError):
    pass


class LabelSizeMismatch(InputError):
    pass


# eigen
class TooFewEigenvalues(AlgorithmError):
    pass


class NotConverged(AlgorithmError):
    pass


# clustering
class TooManyModes(InputError):
    pass


class DegenerateSplit(AlgorithmError):
    pass


class ZeroRow(AlgorithmError):
    pass


# metrics
class SizeMismatch(InputError):
    pass


# benchmark graphs and file formats
class InfeasibleSpec(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class IndexOutOfRange(InputError):
    pass


class MissingCommunity(InputError):
    pass


class EmptyGraph(InputError):
    pass


# theory
class DimensionMismatch(InputError):
    pass


class DisconnectedCluster(AlgorithmError):
    pass


class DegenerateTracking(AlgorithmError):
    pass


# similarity
class NonPositiveSigma(InputError):
    pass


class MissingVariances(InputError):
    pass


# warnings
class DisconnectedGraphWarning(UserWarning):
    """Input graph has several components; the clustering still runs."""

    def __init__(self, message: str, n_components: int):
        super().__init__(message)
        self.n_components = n_components


class SimilarityAboveOneWarning(UserWarning):
    def __init__(self, message: str, count: int, max_value: float):
        super().__init__(message)
        self.count = count
        self.max_value = max_value
