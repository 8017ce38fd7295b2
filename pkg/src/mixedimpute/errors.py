class SchemaError(ValueError):
    """Malformed CSV, schema sidecar, or table construction."""


class DegenerateDataError(ValueError):
    """Data is well-formed but cannot support the requested operation.

    ``code`` is one of ``deletion-empty``, ``all-missing-column``,
    ``no-donors``, ``degenerate-target``, ``class-too-small``.
    """

    def __init__(self, code, message=""):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


class ConfigError(ValueError):
    pass
