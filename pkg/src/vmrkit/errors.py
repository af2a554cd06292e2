"""Exception types shared across the toolkit.

Pure computational modules raise plain ``ValueError`` for contract
violations; these classes mark problems with external data so the CLI
can map them to its data-error exit code.
"""


class DataError(Exception):
    """Raised when an input file is missing, malformed, or inconsistent."""


class FormatError(DataError):
    """Raised when a binary feature file fails magic/size/content checks."""
