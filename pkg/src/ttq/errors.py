"""Exception hierarchy shared by all ttq modules."""


class TtqError(Exception):
    """Base class for every error raised by ttq."""


class QuerySyntaxError(TtqError):
    """Query text could not be tokenized or parsed.

    ``column`` is 1-based; ``expected`` lists the token kinds the parser
    would have accepted at that point (may be empty).
    """

    def __init__(self, message, column=None, expected=()):
        self.message = message
        self.column = column
        self.expected = tuple(expected)
        text = message
        if column is not None:
            text = f"column {column}: {message}"
        if self.expected:
            text += f" (expected {', '.join(self.expected)})"
        super().__init__(text)


# -- model ---------------------------------------------------------------


class ModelError(TtqError):
    pass


class ThreadResolutionError(ModelError):
    def __init__(self, name, reason="not found"):
        self.name = name
        super().__init__(f"thread target {name!r} {reason}")


class MalformedThreadError(ModelError):
    def __init__(self, key, value):
        self.key = key
        self.value = value
        super().__init__(f"attribute {key}={value!r} is not a 'label:target' thread")


class CyclicThreadError(ModelError):
    def __init__(self, node, thread_type):
        self.node = node
        self.thread_type = thread_type
        super().__init__(f"threads of type {thread_type!r} form a cycle through {node.describe()}")


# -- evaluation ----------------------------------------------------------


class EvaluationError(TtqError):
    pass


class UnboundAliasError(EvaluationError):
    """M[alias] used before the alias's comparison evaluated true."""

    def __init__(self, alias):
        self.alias = alias
        super().__init__(f"alias {alias!r} is not bound (its comparison has not matched)")


class UnknownSourceError(EvaluationError):
    def __init__(self, alias):
        self.alias = alias
        super().__init__(f"unknown source alias {alias!r}")


class ArityError(EvaluationError):
    pass


class EvaluationDepthError(EvaluationError):
    pass


# -- actions -------------------------------------------------------------


class ActionError(TtqError):
    pass


class ReadOnlyMemberError(ActionError):
    pass


class CycleError(ActionError):
    pass


class RootNodeError(ActionError):
    pass


class UnknownCommandError(ActionError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown command {name!r}")


class GuardViolation(ActionError):
    """A mutation changed the base text of a sentence; the sentence was rolled back."""

    def __init__(self, sentence_index, before, after):
        self.sentence_index = sentence_index
        self.before = before
        self.after = after
        super().__init__(
            f"base text of sentence {sentence_index} changed: {before!r} -> {after!r}"
        )


# -- I/O -----------------------------------------------------------------


class CorpusIOError(TtqError):
    pass


class IoSpecError(CorpusIOError):
    pass


class XmlFormatError(CorpusIOError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class DuplicateNameError(CorpusIOError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"duplicate node name {name!r}")
