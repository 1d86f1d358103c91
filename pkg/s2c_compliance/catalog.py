import logging
from collections import Counter
from dataclasses import dataclass
from dataclasses import field
from typing import Dict
from typing import FrozenSet
from typing import Iterable
from typing import List
from typing import Optional
from typing import Tuple
from typing import Union

from s2c_compliance.errors import FilterError
from s2c_compliance.errors import SchemaError
from s2c_compliance.errors import UnresolvedReferenceError
from s2c_compliance.helpers.spec import canonical_json
from s2c_compliance.helpers.spec import check_schema
from s2c_compliance.helpers.spec import load_json_document
from s2c_compliance.helpers.spec import write_text
from s2c_compliance.types import ACTIVITY_ID_PATTERN
from s2c_compliance.types import AutomationLevel
from s2c_compliance.types import PRACTICE_CODE_PATTERN
from s2c_compliance.types import PipelineStage
from s2c_compliance.types import RepositoryKind
from s2c_compliance.types import Spec
from s2c_compliance.types import UNCLASSIFIED
from s2c_compliance.types import ValidationError
from s2c_compliance.types import activity_sort_key

logger = logging.getLogger(__name__)

CATALOG_SCHEMA = "s2c-catalog/1"
CATALOG_SCHEMA_FILE = "catalog.schema.json"


@dataclass(frozen=True)
class Practice:
    code: str
    name: str

    @classmethod
    def from_spec(cls, spec: Spec) -> "Practice":
        return Practice(code=spec["code"], name=spec["name"])

    def to_spec(self) -> Spec:
        return {"code": self.code, "name": self.name}


@dataclass(frozen=True)
class Artifact:
    name: str
    repository: RepositoryKind
    description: str = ""

    @classmethod
    def from_spec(cls, spec: Spec) -> "Artifact":
        return Artifact(
            name=spec["name"],
            repository=RepositoryKind(spec["repository"]),
            description=spec.get("description", ""),
        )

    def to_spec(self) -> Spec:
        return {
            "name": self.name,
            "repository": self.repository.value,
            "description": self.description,
        }


@dataclass(frozen=True)
class ToolRef:
    """A tool of the registry. ``aliases`` are the other names a pipeline may invoke it by."""

    name: str
    categories: FrozenSet[str] = frozenset()
    open_source: bool = True
    ci_integrable: bool = True
    aliases: FrozenSet[str] = frozenset()

    @classmethod
    def from_spec(cls, spec: Spec) -> "ToolRef":
        return ToolRef(
            name=spec["name"],
            categories=frozenset(spec.get("categories", [])),
            open_source=spec.get("open_source", True),
            ci_integrable=spec.get("ci_integrable", True),
            aliases=frozenset(spec.get("aliases", [])),
        )

    def to_spec(self) -> Spec:
        return {
            "name": self.name,
            "categories": sorted(self.categories),
            "open_source": self.open_source,
            "ci_integrable": self.ci_integrable,
            "aliases": sorted(self.aliases),
        }


@dataclass(frozen=True)
class Activity:
    """One orchestrable unit of a standard requirement.

    Attributes:
        id: ``<PRACTICE>-<t|e|g><n>``, e.g. ``SI-t5``.
        automation: None while the activity is still unclassified (fresh BPMN drafts).
        stages: the pipeline stages the activity takes place in; empty only for drafts.
    """

    id: str
    practice: str
    requirement: str
    name: str
    automation: Optional[AutomationLevel]
    stages: FrozenSet[PipelineStage]
    description: str = ""
    inputs: FrozenSet[str] = frozenset()
    outputs: FrozenSet[str] = frozenset()
    tools: FrozenSet[str] = frozenset()

    @property
    def earliest_stage(self) -> Optional[PipelineStage]:
        if not self.stages:
            return None
        return min(self.stages, key=lambda stage: stage.index)

    @property
    def classified(self) -> bool:
        return self.automation is not None

    @classmethod
    def from_spec(cls, spec: Spec) -> "Activity":
        raw_automation = spec["automation"]
        automation = None if raw_automation == UNCLASSIFIED else AutomationLevel(raw_automation)

        stages = set()
        for raw_stage in spec.get("stages", []):
            stage = PipelineStage.from_name(raw_stage)
            if stage is None:
                raise SchemaError(f"unknown stage '{raw_stage}'", location=f"activities/{spec['id']}/stages")
            stages.add(stage)

        return Activity(
            id=spec["id"],
            practice=spec["practice"],
            requirement=spec["requirement"],
            name=spec["name"],
            description=spec.get("description", ""),
            inputs=frozenset(spec.get("inputs", [])),
            outputs=frozenset(spec.get("outputs", [])),
            automation=automation,
            tools=frozenset(spec.get("tools", [])),
            stages=frozenset(stages),
        )

    def to_spec(self) -> Spec:
        return {
            "id": self.id,
            "practice": self.practice,
            "requirement": self.requirement,
            "name": self.name,
            "description": self.description,
            "inputs": sorted(self.inputs),
            "outputs": sorted(self.outputs),
            "automation": self.automation.value if self.automation else UNCLASSIFIED,
            "tools": sorted(self.tools),
            "stages": [stage.value for stage in sorted(self.stages, key=lambda stage: stage.index)],
        }


@dataclass(frozen=True)
class ActivityCatalog:
    """A standard instance: practices, artifacts, tool registry and activities.

    The catalog is kept in canonical order on construction: practices as declared,
    artifacts and tools by name, activities by natural id order.
    """

    standard_id: str
    version: str
    practices: Tuple[Practice, ...]
    artifacts: Tuple[Artifact, ...]
    tools: Tuple[ToolRef, ...]
    activities: Tuple[Activity, ...]
    _by_id: Dict[str, Activity] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "practices", tuple(self.practices))
        object.__setattr__(self, "artifacts", tuple(sorted(self.artifacts, key=lambda a: a.name)))
        object.__setattr__(self, "tools", tuple(sorted(self.tools, key=lambda t: t.name)))
        object.__setattr__(self, "activities", tuple(sorted(self.activities, key=lambda a: activity_sort_key(a.id))))
        object.__setattr__(self, "_by_id", {activity.id: activity for activity in self.activities})

    @property
    def practice_codes(self) -> List[str]:
        return [practice.code for practice in self.practices]

    @property
    def artifact_names(self) -> FrozenSet[str]:
        return frozenset(artifact.name for artifact in self.artifacts)

    @property
    def tool_names(self) -> FrozenSet[str]:
        return frozenset(tool.name for tool in self.tools)

    def activity(self, activity_id: str) -> Optional[Activity]:
        return self._by_id.get(activity_id)

    def practice(self, code: str) -> Optional[Practice]:
        for practice in self.practices:
            if practice.code == code:
                return practice

        return None

    def activities_of(self, practice_code: str) -> List[Activity]:
        return [activity for activity in self.activities if activity.practice == practice_code]

    @classmethod
    def from_spec(cls, spec: Spec) -> "ActivityCatalog":
        return ActivityCatalog(
            standard_id=spec["standard_id"],
            version=spec["version"],
            practices=tuple(Practice.from_spec(s) for s in spec["practices"]),
            artifacts=tuple(Artifact.from_spec(s) for s in spec["artifacts"]),
            tools=tuple(ToolRef.from_spec(s) for s in spec["tools"]),
            activities=tuple(Activity.from_spec(s) for s in spec["activities"]),
        )

    def to_spec(self) -> Spec:
        return {
            "schema": CATALOG_SCHEMA,
            "standard_id": self.standard_id,
            "version": self.version,
            "practices": [practice.to_spec() for practice in self.practices],
            "artifacts": [artifact.to_spec() for artifact in self.artifacts],
            "tools": [tool.to_spec() for tool in self.tools],
            "activities": [activity.to_spec() for activity in self.activities],
        }


def validate_catalog(catalog: ActivityCatalog) -> List[ValidationError]:
    """Structural problems of a catalog as (field, message) pairs. References are
    checked separately by ``unresolved_references``.
    """
    errors: List[ValidationError] = []
    if not catalog.activities:
        errors.append(("activities", "Activity count > 0 violated"))

    for code in _duplicates(practice.code for practice in catalog.practices):
        errors.append(("practices", f"duplicate practice code '{code}'"))
    for practice in catalog.practices:
        if not PRACTICE_CODE_PATTERN.fullmatch(practice.code):
            errors.append(("practices", f"practice code '{practice.code}' is not uppercase alphanumeric"))

    for name in _duplicates(artifact.name for artifact in catalog.artifacts):
        errors.append(("artifacts", f"duplicate artifact '{name}'"))

    tool_names = [tool.name for tool in catalog.tools]
    for name in _duplicates(tool_names):
        errors.append(("tools", f"duplicate tool '{name}'"))
    aliases = [alias for tool in catalog.tools for alias in tool.aliases]
    for alias in sorted(set(_duplicates(aliases)) | (set(aliases) & set(tool_names))):
        errors.append(("tools", f"alias '{alias}' is ambiguous within the tool registry"))

    for activity_id in _duplicates(activity.id for activity in catalog.activities):
        errors.append(("activities", f"duplicate activity id '{activity_id}'"))
    for activity in catalog.activities:
        errors += _activity_errors(activity)

    return errors


def _activity_errors(activity: Activity) -> List[ValidationError]:
    where = f"activities/{activity.id}"
    errors: List[ValidationError] = []

    match = ACTIVITY_ID_PATTERN.fullmatch(activity.id)
    if not match:
        errors.append((where, "id must look like <PRACTICE>-<t|e|g><n>"))
    elif match.group("practice") != activity.practice:
        errors.append((where, f"id prefix does not match practice '{activity.practice}'"))

    if not activity.practice:
        errors.append((where, "practice is empty"))
    if not activity.requirement:
        errors.append((where, "requirement is empty"))
    if not activity.stages:
        errors.append((where, "stages must not be empty"))

    if activity.tools:
        if activity.automation is None:
            errors.append((where, "unclassified activities cannot reference tools"))
        elif not activity.automation.allows_tools:
            errors.append((where, f"{activity.automation.value} activities cannot reference tools"))

    return errors


def unresolved_references(catalog: ActivityCatalog) -> List[str]:
    """Every practice, tool and artifact name mentioned by an activity but not declared."""
    practice_codes = set(catalog.practice_codes)
    tool_names = catalog.tool_names
    artifact_names = catalog.artifact_names

    offenders = set()
    for activity in catalog.activities:
        if activity.practice not in practice_codes:
            offenders.add(f"{activity.id}: practice '{activity.practice}'")
        for tool in activity.tools - tool_names:
            offenders.add(f"{activity.id}: tool '{tool}'")
        for artifact in (activity.inputs | activity.outputs) - artifact_names:
            offenders.add(f"{activity.id}: artifact '{artifact}'")

    return sorted(offenders)


def ensure_valid(catalog: ActivityCatalog, resolve_references: bool = True) -> None:
    errors = validate_catalog(catalog)
    if errors:
        location, message = errors[0]
        raise SchemaError(message, location=location, errors=[f"{f}: {m}" for f, m in errors])

    offenders = unresolved_references(catalog) if resolve_references else []
    if offenders:
        raise UnresolvedReferenceError(offenders)


def load_catalog(path: str, resolve_references: bool = True) -> ActivityCatalog:
    """Loads and validates a catalog file.

    With ``resolve_references=False`` undeclared practices, tools and artifacts are
    left for the caller to report (see ``unresolved_references``).
    """
    document = load_json_document(path)
    check_schema(document, CATALOG_SCHEMA_FILE)

    catalog = ActivityCatalog.from_spec(document)
    ensure_valid(catalog, resolve_references)

    logger.debug(
        "Loaded catalog %s %s from %s: %d practices, %d activities",
        catalog.standard_id,
        catalog.version,
        path,
        len(catalog.practices),
        len(catalog.activities),
    )
    return catalog


def catalog_to_text(catalog: ActivityCatalog) -> str:
    """Canonical serialization: fixed key order, sorted collections, trailing newline."""
    return canonical_json(catalog.to_spec())


def save_catalog(catalog: ActivityCatalog, path: str) -> None:
    ensure_valid(catalog)
    write_text(path, catalog_to_text(catalog))


def load_external_inputs(path: str) -> FrozenSet[str]:
    """Reads the sidecar list of artifacts that enter the process from outside."""
    document = load_json_document(path)
    if isinstance(document, dict):
        document = document.get("external_inputs")

    if not isinstance(document, list) or not all(isinstance(name, str) for name in document):
        raise SchemaError("expected a list of artifact names", location=path)

    return frozenset(document)


def query_activities(
    catalog: ActivityCatalog,
    practice: Optional[str] = None,
    stage: Union[PipelineStage, str, None] = None,
    automation: Union[AutomationLevel, str, None] = None,
    requirement: Optional[str] = None,
) -> List[Activity]:
    """Activities matching every given filter, in id order. No filter returns all."""
    if practice is not None and practice not in catalog.practice_codes:
        raise FilterError(f"Unknown practice '{practice}'. Known practices: {', '.join(catalog.practice_codes)}")

    wanted_stage = _filter_stage(stage)
    wanted_level = _filter_automation(automation)

    return [
        activity
        for activity in catalog.activities
        if (practice is None or activity.practice == practice)
        and (wanted_stage is None or wanted_stage in activity.stages)
        and (wanted_level is None or activity.automation == wanted_level)
        and (requirement is None or activity.requirement == requirement)
    ]


def _filter_stage(stage: Union[PipelineStage, str, None]) -> Optional[PipelineStage]:
    if stage is None or isinstance(stage, PipelineStage):
        return stage

    resolved = PipelineStage.from_name(stage)
    if resolved is None:
        raise FilterError(f"Unknown stage '{stage}'. Accepted names: {', '.join(PipelineStage.accepted_names())}")

    return resolved


def _filter_automation(automation: Union[AutomationLevel, str, None]) -> Optional[AutomationLevel]:
    if automation is None or isinstance(automation, AutomationLevel):
        return automation

    resolved = AutomationLevel.from_name(automation)
    if resolved is None:
        raise FilterError(f"Unknown automation level '{automation}'")

    return resolved


def _duplicates(values: Iterable[str]) -> List[str]:
    return sorted(value for value, count in Counter(values).items() if count > 1)
