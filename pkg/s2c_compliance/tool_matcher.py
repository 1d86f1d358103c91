from abc import ABCMeta
from abc import abstractmethod
from typing import FrozenSet
from typing import Iterable

from s2c_compliance.catalog import ToolRef


class ToolMatcher(metaclass=ABCMeta):
    """Decides whether a tool invoked by a pipeline step is a given registry tool.

    Matching is exact: a step counts only when it names the tool or one of its aliases.
    """

    @abstractmethod
    def matches(self, invoked: str) -> bool:
        raise NotImplementedError

    @classmethod
    def from_tool(cls, tool: ToolRef) -> "ToolMatcher":
        if tool.aliases:
            return AliasToolMatcher(tool.name, tool.aliases)
        return ExactToolMatcher(tool.name)

    @classmethod
    def for_name(cls, name: str) -> "ToolMatcher":
        return ExactToolMatcher(name)


class ExactToolMatcher(ToolMatcher):
    def __init__(self, name: str):
        self.name = name

    def __str__(self) -> str:
        return self.name

    def matches(self, invoked: str) -> bool:
        return self.name == invoked


class AliasToolMatcher(ToolMatcher):
    def __init__(self, name: str, aliases: Iterable[str]):
        self.name = name
        self.aliases: FrozenSet[str] = frozenset(aliases)

    def __str__(self) -> str:
        return self.name

    def matches(self, invoked: str) -> bool:
        return invoked == self.name or invoked in self.aliases
