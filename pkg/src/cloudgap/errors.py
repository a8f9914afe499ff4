"""Exception types shared across the package."""


class CloudGapError(Exception):
    """Base class for all cloudgap errors."""


class IngestionError(CloudGapError):
    """A dataset file failed to parse or violated its schema.

    Messages carry file/row/column context so users can fix the input.
    """


class EmptyCatalogError(CloudGapError):
    """A datacenter query matched no catalog entries after filtering."""


class NoAccessError(CloudGapError):
    """Total access mass is zero: no unit reaches any datacenter.

    The concentration index is undefined in this situation.
    """
