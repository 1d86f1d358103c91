"""The 160-activity witness catalog.

The reference statistics only give the activity total and rounded percentages per
automation level. This composition is one integer split that reproduces them
(61/14/22/13/50 -> 38/9/14/8/31 %), spread over the eight practices so that the
per-practice picture follows the qualitative description: SG fully manual, SR mostly
manual, SM/SVV/SUM highly automatable.
"""
from typing import Dict
from typing import List
from typing import Tuple

from s2c_compliance.catalog import Activity
from s2c_compliance.catalog import ActivityCatalog
from s2c_compliance.catalog import Practice
from s2c_compliance.types import AutomationLevel
from s2c_compliance.types import PipelineStage

IEC_62443_4_1_PRACTICES: List[Practice] = [
    Practice("SM", "Security management"),
    Practice("SR", "Specification of security requirements"),
    Practice("SD", "Secure by design"),
    Practice("SI", "Secure implementation"),
    Practice("SVV", "Security verification and validation testing"),
    Practice("DM", "Management of security-related issues"),
    Practice("SUM", "Security update management"),
    Practice("SG", "Security guidelines"),
]

# Counts in AutomationLevel declaration order:
# HumanTask, Transparency, PartialAutomation, ToolPossible, Complete
FIXTURE_COMPOSITION: Dict[str, Tuple[int, int, int, int, int]] = {
    "SM": (4, 2, 2, 2, 10),
    "SR": (14, 2, 3, 1, 0),
    "SD": (10, 3, 3, 3, 1),
    "SI": (4, 1, 3, 2, 10),
    "SVV": (2, 1, 6, 1, 10),
    "DM": (5, 3, 3, 3, 6),
    "SUM": (2, 2, 2, 1, 13),
    "SG": (20, 0, 0, 0, 0),
}

FIXTURE_STAGES: Dict[str, PipelineStage] = {
    "SM": PipelineStage.BUILD,
    "SR": PipelineStage.PLAN,
    "SD": PipelineStage.PLAN,
    "SI": PipelineStage.CODE,
    "SVV": PipelineStage.TEST,
    "DM": PipelineStage.MONITOR,
    "SUM": PipelineStage.OPERATE,
    "SG": PipelineStage.RELEASE,
}

ACTIVITIES_PER_REQUIREMENT = 5


def build_fixture_catalog() -> ActivityCatalog:
    activities: List[Activity] = []
    for practice in IEC_62443_4_1_PRACTICES:
        levels = [
            level
            for level, count in zip(AutomationLevel, FIXTURE_COMPOSITION[practice.code])
            for _ in range(count)
        ]
        for index, level in enumerate(levels, start=1):
            activities.append(
                Activity(
                    id=f"{practice.code}-t{index}",
                    practice=practice.code,
                    requirement=f"{practice.code}-{(index - 1) // ACTIVITIES_PER_REQUIREMENT + 1}",
                    name=f"{practice.name} activity {index}",
                    description="Constructed activity; only its automation level is meaningful.",
                    automation=level,
                    stages=frozenset({FIXTURE_STAGES[practice.code]}),
                ),
            )

    return ActivityCatalog(
        standard_id="IEC-62443-4-1",
        version="fixture-160",
        practices=tuple(IEC_62443_4_1_PRACTICES),
        artifacts=(),
        tools=(),
        activities=tuple(activities),
    )
