class InvalidParameterError(ValueError):
    pass


class InvalidProblemError(ValueError):
    pass


class InvalidStateError(ValueError):
    pass


class UndefinedIndexError(ValueError):
    pass


class ScenarioError(ValueError):
    """Raised with every problem found while reading a scenario.

    ``issues`` is a list of ``(line_number, message)``; the line number is
    ``None`` for problems that are not tied to one line.
    """

    def __init__(self, issues):
        self.issues = list(issues)
        lines = []
        for lineno, msg in self.issues:
            lines.append(f"line {lineno}: {msg}" if lineno else msg)
        super().__init__("\n".join(lines))
