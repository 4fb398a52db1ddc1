"""Exception hierarchy.

Data and format problems derive from :class:`DataError`; configurations that
parse fine but cannot be satisfied (a category label nobody can embed, a
single-class training set) derive from :class:`InfeasibleError`.
"""


class TagsemError(Exception):
    pass


class DataError(TagsemError, ValueError):
    """Malformed or inconsistent input data."""

    def __init__(self, message, path=None, line=None):
        self.path = None if path is None else str(path)
        self.line = line
        where = []
        if self.path is not None:
            where.append(self.path)
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class InfeasibleError(TagsemError, ValueError):
    """Inputs are well formed but the requested computation is impossible."""
