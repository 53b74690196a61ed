"""Error types shared across the toolkit.

Invalid arguments raise plain :class:`ValueError`; file problems raise
:class:`OSError` subclasses naming the offending path.  The classes below
cover the two failure modes that need their own handling at the CLI level.
"""


class CorruptIndexError(Exception):
    """A fingerprint index file failed validation (bad magic, version,
    or truncated/garbled sections)."""


class ExternalDenoiserError(Exception):
    """An external denoiser subprocess failed: nonzero exit, timeout,
    unreadable output, or output shape mismatch."""
