"""Exception types shared across the package.

The CLI maps these onto process exit codes: bad inputs exit 2, resource
limits exit 3, anything that fails mid-run exits 4.
"""


class ValidationError(ValueError):
    """Malformed or out-of-range input (sizes, indices, configs, files)."""


class CapacityError(RuntimeError):
    """A requested computation exceeds a configured resource limit."""


class StateError(RuntimeError):
    """An object is missing state required by the operation (for example an
    instance without a solved optimal cut)."""


class FitError(ValidationError):
    """A fit has no usable data points."""


class AbortedRunError(RuntimeError):
    """A distributed run stopped because a worker failed."""
