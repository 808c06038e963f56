"""Exception types raised across the package."""


class BrueError(Exception):
    """Base class for all package errors."""


class NetworkFormatError(BrueError, ValueError):
    """A network document or constructor argument is malformed."""


class NoPath(BrueError):
    """Some trip has no simple path between its endpoints."""


class PathExplosion(BrueError):
    """Path or support enumeration would exceed the configured cap."""


class NotConverged(BrueError):
    """An iterative solver stopped before reaching its tolerance.

    The best iterate found so far is kept on ``best`` so callers can still
    inspect or use it.
    """

    def __init__(self, message, best=None, iterations=None):
        super().__init__(message)
        self.best = best
        self.iterations = iterations


class UnsupportedStateSpace(BrueError):
    """The operation is only certified for binary state spaces."""
