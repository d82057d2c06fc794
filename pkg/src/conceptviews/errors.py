"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 2, FormatError -> 3,
ResourceBudgetError -> 4.
"""


class ConceptViewsError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ConceptViewsError):
    """Invalid parameters or inconsistent request (bad ids, bad fractions, ...)."""


class UnknownIdError(ConfigError):
    """An object, class, attribute, or neuron identifier is not known."""

    def __init__(self, kind: str, identifier: str):
        self.kind = kind
        self.identifier = identifier
        super().__init__(f"unknown {kind}: {identifier!r}")


class KeyMismatchError(ConfigError):
    """Two prediction maps do not share the same key set."""

    def __init__(self, only_left: set, only_right: set):
        self.only_left = frozenset(only_left)
        self.only_right = frozenset(only_right)
        super().__init__(
            "prediction maps disagree on keys: "
            f"only in first: {sorted(only_left)!r}, only in second: {sorted(only_right)!r}"
        )


class FormatError(ConceptViewsError):
    """An input file does not follow its documented format."""

    def __init__(self, path, message: str):
        self.path = str(path)
        super().__init__(f"{path}: {message}")


class ResourceBudgetError(ConceptViewsError):
    """A configured resource budget (concept count, export size, ...) was exceeded."""
