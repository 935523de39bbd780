"""Exception types shared across the package."""

from __future__ import annotations


class ParseError(ValueError):
    """A family document could not be read.

    Carries position information: ``line``/``column`` for syntax errors,
    ``field`` (a dotted path such as ``nodes[3].projector``) for schema
    violations.  At least one of the two is always set.
    """

    def __init__(self, message: str, *, line: int | None = None,
                 column: int | None = None, field: str | None = None):
        self.line = line
        self.column = column
        self.field = field
        parts = []
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", column {column}"
            parts.append(loc)
        if field is not None:
            parts.append(field)
        prefix = ": ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.message = message


class InvalidFamilyError(ValueError):
    """A family failed structural validation.

    The full :class:`~qhistories.structure.ValidationReport` is available
    as the ``report`` attribute; ``nodes`` collects every node id named by
    an issue.
    """

    def __init__(self, report):
        self.report = report
        self.nodes = tuple(sorted({n for issue in report.issues for n in issue.nodes}))
        lines = [str(issue) for issue in report.issues]
        super().__init__("invalid family:\n  " + "\n  ".join(lines))


class TransBranchError(ValueError):
    """Summation of histories from different branches was requested.

    The coarse graining defined on branching families only merges sibling
    leaves; across branches the sum has no defining decomposition, so it
    is refused rather than given an arbitrary value.
    """

    def __init__(self, leaf_a: int, leaf_b: int):
        self.leaves = (leaf_a, leaf_b)
        super().__init__(
            f"trans-branch sum undefined: leaves {leaf_a} and {leaf_b} "
            f"do not share a parent"
        )


class EmbeddingError(ValueError):
    """A whole family could not be embedded into the history space."""
