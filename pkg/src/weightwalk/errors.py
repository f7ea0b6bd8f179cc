"""Exception types raised across the package."""


class WeightWalkError(Exception):
    """Base class for all package errors."""


class RejectedEdge(WeightWalkError):
    """An edge violates graph invariants (self-loop, duplicate, bad weight, bad id)."""


class EmptyGraph(WeightWalkError):
    """An operation produced or received a graph with no edges."""


class DegenerateParams(WeightWalkError):
    """Generator parameters are outside the model's valid range."""


class CalibrationFailed(WeightWalkError):
    """Parameter calibration cannot reach the requested target."""


class IsolatedNode(WeightWalkError):
    """A transition distribution was requested for a node with no neighbors."""


class NonFiniteUpdate(WeightWalkError):
    """Training produced a non-finite embedding entry."""


class ZeroVector(WeightWalkError):
    """Cosine similarity was requested for a zero-norm vector."""


class DegenerateVariance(WeightWalkError):
    """Pearson correlation is undefined because one input is constant."""


class ParseError(WeightWalkError):
    """An edge-list or config file could not be parsed."""


class UnknownDataset(WeightWalkError):
    """A dataset name is not in the study registry."""


class NetworkUnavailable(WeightWalkError):
    """A dataset is not cached and network access is disabled or failing."""


class UpstreamFormatChanged(WeightWalkError):
    """A downloaded dataset does not match the expected export layout."""


class ConfigError(WeightWalkError):
    """An experiment config file failed schema validation."""
