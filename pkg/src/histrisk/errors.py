"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid user-supplied data or configuration (bad file, bad flag, bad value)."""


class SingularDesignError(InputError):
    """Regression design matrix is rank deficient; the message names the dead column."""
