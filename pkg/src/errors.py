"""
Exceptions shared across the toolkit
"""

from typing import Optional, Tuple


class DocumentError(ValueError):
    """Instance or code document rejected by the parser"""


class CodeMismatchError(ValueError):
    """Network code does not fit the instance it is evaluated on"""

    def __init__(self, detail: str):
        super().__init__(f"code/instance mismatch: {detail}")
        self.detail = detail


class ExhaustiveCheckTooLarge(RuntimeError):
    """Exhaustive enumeration refused because the state space is too big"""

    def __init__(self, size: int, limit: int, what: str = "evaluations"):
        super().__init__(
            f"exhaustive check too large: {size} {what} exceeds limit {limit}"
        )
        self.size = size
        self.limit = limit


class PremiseViolation(ValueError):
    """A transformation was asked to run on a code that is not zero-error"""

    def __init__(self, detail: str, counterexample: Optional[object] = None):
        super().__init__(f"premise violated: {detail}")
        self.counterexample = counterexample


class BijectionChainViolation(ValueError):
    """A branch signal relation is not a permutation"""

    def __init__(
        self,
        branch: int,
        relation: str,
        values: Tuple[int, int],
        messages: Tuple[int, int],
    ):
        super().__init__(
            f"bijection chain violated: branch {branch}: {relation} "
            f"(values {values[0]}, {values[1]}; messages {messages[0]}, {messages[1]})"
        )
        self.branch = branch
        self.relation = relation
        self.values = values
        self.messages = messages


class UsageError(ValueError):
    """Command arguments that cannot be acted on"""
