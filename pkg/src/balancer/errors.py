"""Exception hierarchy shared across the pipeline.

InputError covers anything a user can fix (bad files, bad flags, bad values);
the CLI maps it to exit code 2. InvariantError means internal bookkeeping
disagreed with a ground-truth recount; the CLI maps it to exit code 3.
"""


class InputError(Exception):
    """Invalid input data or configuration."""


class InvariantError(Exception):
    """An internal consistency audit failed."""
