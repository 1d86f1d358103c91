import re
from enum import Enum
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple
from typing import Union


Spec = Dict[str, Any]
ValidationError = Tuple[str, str]
SortKey = Tuple[Union[str, int], ...]

UNCLASSIFIED = "unclassified"


class AutomationLevel(Enum):
    """To what extent a standard activity can be automated.

    Members are declared in the order the automation statistics are reported
    (human first, complete last). Use ``roadmap_rank`` for roadmap ordering.
    """

    HUMAN_TASK = "HumanTask"
    TRANSPARENCY = "Transparency"
    PARTIAL_AUTOMATION = "PartialAutomation"
    TOOL_POSSIBLE = "ToolPossible"
    COMPLETE = "Complete"

    @property
    def label(self) -> str:
        return _AUTOMATION_LABELS[self]

    @property
    def roadmap_rank(self) -> int:
        """0 is introduced first: Complete > PartialAutomation > Transparency > ToolPossible > HumanTask."""
        return _ROADMAP_ORDER.index(self)

    @property
    def allows_tools(self) -> bool:
        # ToolPossible means no tool was identified yet
        return self in (
            AutomationLevel.COMPLETE,
            AutomationLevel.PARTIAL_AUTOMATION,
            AutomationLevel.TRANSPARENCY,
        )

    @classmethod
    def from_name(cls, name: str) -> Optional["AutomationLevel"]:
        for level in cls:
            if name == level.value:
                return level

        return None


_AUTOMATION_LABELS = {
    AutomationLevel.HUMAN_TASK: "Human Task",
    AutomationLevel.TRANSPARENCY: "Transparency",
    AutomationLevel.PARTIAL_AUTOMATION: "Partial Automation",
    AutomationLevel.TOOL_POSSIBLE: "Tool Possible",
    AutomationLevel.COMPLETE: "Complete Automation",
}

_ROADMAP_ORDER = [
    AutomationLevel.COMPLETE,
    AutomationLevel.PARTIAL_AUTOMATION,
    AutomationLevel.TRANSPARENCY,
    AutomationLevel.TOOL_POSSIBLE,
    AutomationLevel.HUMAN_TASK,
]


class PipelineStage(Enum):
    PLAN = "Plan"
    CODE = "Code"
    BUILD = "Build"
    TEST = "Test"
    RELEASE = "Release"
    DEPLOY = "Deploy"
    OPERATE = "Operate"
    MONITOR = "Monitor"

    @property
    def index(self) -> int:
        return list(PipelineStage).index(self)

    @classmethod
    def from_name(cls, name: str) -> Optional["PipelineStage"]:
        """Resolves a stage name case-insensitively, aliases included."""
        key = name.strip().lower()
        for stage in cls:
            if key == stage.value.lower():
                return stage

        return STAGE_ALIASES.get(key)

    @classmethod
    def accepted_names(cls) -> List[str]:
        return [stage.value for stage in cls] + [alias.capitalize() for alias in STAGE_ALIASES]


STAGE_ALIASES: Dict[str, PipelineStage] = {
    "concept": PipelineStage.PLAN,
}


class RepositoryKind(Enum):
    BACKLOG = "Backlog"
    CODE_BASE = "CodeBase"
    TEST_REPO = "TestRepo"
    PRE_PRODUCTION = "PreProduction"
    PRODUCTION = "Production"
    DOCUMENTATION = "Documentation"
    ANALYTICS = "Analytics"


class ActivityKind(Enum):
    TASK = "t"
    EVENT = "e"
    GATEWAY = "g"


ACTIVITY_ID_PATTERN = re.compile(r"(?P<practice>[A-Z][A-Z0-9]*)-(?P<kind>[teg])(?P<index>[1-9][0-9]*)")
PRACTICE_CODE_PATTERN = re.compile(r"[A-Z0-9]+")


def activity_sort_key(activity_id: str) -> SortKey:
    """Natural ordering for activity ids, so that SI-t2 sorts before SI-t10."""
    parts = re.split(r"(\d+)", activity_id)
    return tuple(int(part) if part.isdigit() else part for part in parts)
