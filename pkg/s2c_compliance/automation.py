import logging
from dataclasses import dataclass
from typing import Dict
from typing import Iterable
from typing import List
from typing import Tuple

from s2c_compliance.catalog import Activity
from s2c_compliance.catalog import ActivityCatalog
from s2c_compliance.errors import UnclassifiedError
from s2c_compliance.helpers.rounding import half_up_percent
from s2c_compliance.types import AutomationLevel
from s2c_compliance.types import PipelineStage
from s2c_compliance.types import Spec
from s2c_compliance.types import activity_sort_key

logger = logging.getLogger(__name__)

GLOBAL_SCOPE = "global"

ROADMAP_RATIONALES: Dict[AutomationLevel, str] = {
    AutomationLevel.COMPLETE: "A tool can perform the activity completely; orchestrate it in the pipeline first.",
    AutomationLevel.PARTIAL_AUTOMATION: "Automate the tool-supported part and keep a manual step for the rest.",
    AutomationLevel.TRANSPARENCY: "Introduce tooling that gives the team the results a human decision needs.",
    AutomationLevel.TOOL_POSSIBLE: "Automatable, but a tool still has to be selected or built.",
    AutomationLevel.HUMAN_TASK: "Needs a human; plan collaboration with security experts and record attestations.",
}

BAR_WIDTH = 50
BAR_SYMBOLS: Dict[AutomationLevel, str] = {
    AutomationLevel.HUMAN_TASK: "H",
    AutomationLevel.TRANSPARENCY: "T",
    AutomationLevel.PARTIAL_AUTOMATION: "P",
    AutomationLevel.TOOL_POSSIBLE: "?",
    AutomationLevel.COMPLETE: "C",
}


@dataclass(frozen=True)
class AutomationSummary:
    scope: str
    counts: Dict[AutomationLevel, int]
    percents: Dict[AutomationLevel, int]
    total: int

    @classmethod
    def of(cls, scope: str, activities: List[Activity]) -> "AutomationSummary":
        counts = {level: 0 for level in AutomationLevel}
        for activity in activities:
            counts[activity.automation] += 1

        total = len(activities)
        return AutomationSummary(
            scope=scope,
            counts=counts,
            percents={level: half_up_percent(count, total) for level, count in counts.items()},
            total=total,
        )

    def to_spec(self) -> Spec:
        return {
            "scope": self.scope,
            "total": self.total,
            "counts": {level.value: self.counts[level] for level in AutomationLevel},
            "percents": {level.value: self.percents[level] for level in AutomationLevel},
            "automation_potential": automation_potential(self),
        }


@dataclass(frozen=True)
class RoadmapEntry:
    rank: int
    activity_id: str
    automation: AutomationLevel
    rationale: str

    def to_spec(self) -> Spec:
        return {
            "rank": self.rank,
            "activity": self.activity_id,
            "automation": self.automation.value,
            "rationale": self.rationale,
        }


def ensure_classified(catalog: ActivityCatalog) -> None:
    unclassified = [activity.id for activity in catalog.activities if not activity.classified]
    if unclassified:
        raise UnclassifiedError(unclassified)


def summarize(catalog: ActivityCatalog) -> List[AutomationSummary]:
    """One summary per practice with activities, in catalog order, then the global one."""
    ensure_classified(catalog)

    summaries = []
    for practice in catalog.practices:
        activities = catalog.activities_of(practice.code)
        if activities:
            summaries.append(AutomationSummary.of(practice.code, activities))

    summaries.append(AutomationSummary.of(GLOBAL_SCOPE, list(catalog.activities)))
    return summaries


def automation_potential(summary: AutomationSummary) -> int:
    """Percent of activities that are at least partly automatable (not HumanTask)."""
    return half_up_percent(summary.total - summary.counts[AutomationLevel.HUMAN_TASK], summary.total)


def roadmap(catalog: ActivityCatalog, exclude: Iterable[str] = frozenset()) -> List[RoadmapEntry]:
    """Orders the non-excluded activities for introduction into the pipeline:
    by automation level, then earliest stage, then id.
    """
    ensure_classified(catalog)
    excluded = frozenset(exclude)

    ordered = sorted(
        (activity for activity in catalog.activities if activity.id not in excluded),
        key=_roadmap_key,
    )
    return [
        RoadmapEntry(
            rank=rank,
            activity_id=activity.id,
            automation=activity.automation,
            rationale=ROADMAP_RATIONALES[activity.automation],
        )
        for rank, activity in enumerate(ordered, start=1)
    ]


def _roadmap_key(activity: Activity):
    stage = activity.earliest_stage
    # Activities without stages go last within their level
    stage_index = stage.index if stage is not None else len(PipelineStage)
    return activity.automation.roadmap_rank, stage_index, activity_sort_key(activity.id)


def roadmap_iterations(entries: List[RoadmapEntry]) -> List[Tuple[AutomationLevel, List[RoadmapEntry]]]:
    """Groups a roadmap into successive iterations, one per automation level."""
    iterations: List[Tuple[AutomationLevel, List[RoadmapEntry]]] = []
    for entry in entries:
        if not iterations or iterations[-1][0] != entry.automation:
            iterations.append((entry.automation, []))
        iterations[-1][1].append(entry)

    return iterations


def format_summary_table(summaries: List[AutomationSummary]) -> str:
    """Plain-text table, one row per scope: percent per level, a stacked bar and the total.

    Example row::

        global      38%     9%    14%     8%    31%  |HHHHHHHHHHHHHHHHHHHTTTTPPPPPPP????CCCCCCCCCCCCCCCC|  n=160
    """
    header = f"{'scope':<8}" + "".join(f"{BAR_SYMBOLS[level]:>7}" for level in AutomationLevel)
    lines = [header]
    for summary in summaries:
        percents = "".join(f"{summary.percents[level]:>6}%" for level in AutomationLevel)
        lines.append(f"{summary.scope:<8}{percents}  |{_bar(summary)}|  n={summary.total}")

    legend = "  ".join(f"{BAR_SYMBOLS[level]}={level.label}" for level in AutomationLevel)
    lines.append("")
    lines.append(legend)
    return "\n".join(lines) + "\n"


def _bar(summary: AutomationSummary) -> str:
    # Largest-remainder split so the bar is always BAR_WIDTH wide
    exact = {level: summary.counts[level] * BAR_WIDTH / summary.total for level in AutomationLevel}
    widths = {level: int(value) for level, value in exact.items()}
    leftover = BAR_WIDTH - sum(widths.values())
    for level in sorted(AutomationLevel, key=lambda lv: (-(exact[lv] - widths[lv]), lv.roadmap_rank))[:leftover]:
        widths[level] += 1

    return "".join(BAR_SYMBOLS[level] * widths[level] for level in AutomationLevel)
