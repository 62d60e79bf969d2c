class GlueforgeError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(GlueforgeError):
    """Malformed or inconsistent input: bad endpoints, unknown labels,
    violated preconditions, invalid documents."""


class ResourceError(GlueforgeError):
    """An enumeration would exceed the configured cap."""

    def __init__(self, message, size=None, cap=None):
        super().__init__(message)
        self.size = size
        self.cap = cap


DEFAULT_CAP = 1_000_000


def check_cap(size, cap, what):
    if cap is None:
        cap = DEFAULT_CAP
    if size > cap:
        raise ResourceError(
            "%s would enumerate %d items, above the cap of %d" % (what, size, cap),
            size=size, cap=cap)
    return cap
