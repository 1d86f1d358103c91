import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple

from lxml import etree

from s2c_compliance.catalog import Activity
from s2c_compliance.catalog import CATALOG_SCHEMA
from s2c_compliance.errors import MappingError
from s2c_compliance.errors import SubsetError
from s2c_compliance.errors import XmlError
from s2c_compliance.helpers.spec import canonical_json
from s2c_compliance.types import ActivityKind
from s2c_compliance.types import PRACTICE_CODE_PATTERN
from s2c_compliance.types import Spec

logger = logging.getLogger(__name__)


class ElementKind(Enum):
    TASK = "Task"
    EVENT = "Event"
    GATEWAY = "Gateway"
    DATA_OBJECT = "DataObject"


class Direction(Enum):
    INPUT = "input"
    OUTPUT = "output"


TASK_TAGS = {
    "task",
    "userTask",
    "manualTask",
    "serviceTask",
    "scriptTask",
    "businessRuleTask",
    "sendTask",
    "receiveTask",
}
EVENT_TAGS = {
    "startEvent",
    "endEvent",
    "intermediateCatchEvent",
    "intermediateThrowEvent",
}
GATEWAY_TAGS = {"exclusiveGateway", "parallelGateway"}

# Tags read as part of another element, or that only carry diagram/documentation data
STRUCTURAL_TAGS = {
    "sequenceFlow",
    "dataObject",
    "dataObjectReference",
    "dataInputAssociation",
    "dataOutputAssociation",
    "sourceRef",
    "targetRef",
    "documentation",
    "extensionElements",
    "incoming",
    "outgoing",
    "ioSpecification",
    "dataInput",
    "dataOutput",
    "inputSet",
    "outputSet",
    "dataInputRefs",
    "dataOutputRefs",
    "property",
    "laneSet",
    "lane",
    "flowNodeRef",
    "conditionExpression",
}

DRAFT_KIND = {
    ElementKind.TASK: ActivityKind.TASK,
    ElementKind.EVENT: ActivityKind.EVENT,
    ElementKind.GATEWAY: ActivityKind.GATEWAY,
}


@dataclass(frozen=True)
class BpmnElement:
    id: str
    kind: ElementKind
    label: str


@dataclass(frozen=True)
class DataAssociation:
    """``data_ref`` is the id of the data object (or data object reference) associated."""

    element_id: str
    data_ref: str
    direction: Direction


@dataclass(frozen=True)
class ProcessModel:
    process_id: str
    name: str
    elements: Tuple[BpmnElement, ...]
    flows: Tuple[Tuple[str, str], ...]
    data_associations: Tuple[DataAssociation, ...]
    data_refs: Dict[str, str]
    warnings: Tuple[str, ...] = ()

    @property
    def flow_elements(self) -> List[BpmnElement]:
        return [element for element in self.elements if element.kind in DRAFT_KIND]

    @property
    def data_objects(self) -> List[BpmnElement]:
        return [element for element in self.elements if element.kind == ElementKind.DATA_OBJECT]


def parse_bpmn(xml: bytes) -> ProcessModel:
    """Parses the supported BPMN 2.0 subset out of ``xml``.

    Unsupported elements are skipped and reported in ``ProcessModel.warnings``.
    Only the first process is read. An element id used twice within it is a SubsetError.
    """
    parser = etree.XMLParser(resolve_entities=False, no_network=True, remove_comments=True)
    try:
        root = etree.fromstring(xml, parser)
    except etree.XMLSyntaxError as e:
        line, column = e.position
        raise XmlError(e.msg, line, column, _byte_offset(xml, line, column)) from e

    processes = [el for el in root.iter(etree.Element) if _local_name(el) == "process"]
    if not processes:
        raise SubsetError("document contains no <process> element")

    warnings: List[str] = []
    if len(processes) > 1:
        ignored = ", ".join(p.get("id", "?") for p in processes[1:])
        warnings.append(f"only the first process is read; ignored: {ignored}")

    process = processes[0]
    elements, data_refs, element_warnings = _collect_elements(process)
    warnings += element_warnings

    element_ids = {element.id for element in elements}
    flows: List[Tuple[str, str]] = []
    for flow in _children(process, "sequenceFlow"):
        source, target = flow.get("sourceRef"), flow.get("targetRef")
        if source in element_ids and target in element_ids:
            flows.append((source, target))
        else:
            warnings.append(f"sequence flow '{flow.get('id')}' skipped: endpoint is missing or unsupported")

    associations = _collect_associations(process, element_ids)

    for warning in warnings:
        logger.warning("BPMN %s: %s", process.get("id"), warning)

    return ProcessModel(
        process_id=process.get("id", ""),
        name=process.get("name", ""),
        elements=tuple(elements),
        flows=tuple(flows),
        data_associations=tuple(associations),
        data_refs=data_refs,
        warnings=tuple(warnings),
    )


def _collect_elements(process) -> Tuple[List[BpmnElement], Dict[str, str], List[str]]:
    """Returns elements in document order, the data-ref -> data object element map, and warnings.

    A data object referenced by a dataObjectReference is represented by its first
    reference; associations may point at either id.
    """
    elements: List[BpmnElement] = []
    warnings: List[str] = []
    data_refs: Dict[str, str] = {}

    data_objects = {el.get("id"): el for el in _children(process, "dataObject")}
    first_reference: Dict[str, str] = {}
    for reference in _children(process, "dataObjectReference"):
        first_reference.setdefault(reference.get("dataObjectRef"), reference.get("id"))

    seen_ids = set()
    for el in process:
        if not isinstance(el.tag, str):
            continue

        tag = _local_name(el)
        element_id = el.get("id", "")
        if element_id in seen_ids:
            raise SubsetError(f"element id '{element_id}' is used more than once")
        if element_id:
            seen_ids.add(element_id)

        kind = _element_kind(tag)
        if kind is not None:
            elements.append(BpmnElement(element_id, kind, _label(el)))

        elif tag == "dataObjectReference":
            target = data_objects.get(el.get("dataObjectRef"))
            label = _label(el) or (_label(target) if target is not None else "") or element_id
            elements.append(BpmnElement(element_id, ElementKind.DATA_OBJECT, label))
            data_refs[element_id] = element_id

        elif tag == "dataObject":
            if element_id in first_reference:
                data_refs[element_id] = first_reference[element_id]
            else:
                elements.append(BpmnElement(element_id, ElementKind.DATA_OBJECT, _label(el) or element_id))
                data_refs[element_id] = element_id

        elif tag not in STRUCTURAL_TAGS:
            warnings.append(f"unsupported element <{tag}> '{element_id}' skipped")

    return elements, data_refs, warnings


def _collect_associations(process, element_ids) -> List[DataAssociation]:
    associations: List[DataAssociation] = []
    for el in process:
        if not isinstance(el.tag, str) or el.get("id") not in element_ids:
            continue

        for assoc in _children(el, "dataInputAssociation"):
            for source in _children(assoc, "sourceRef"):
                associations.append(DataAssociation(el.get("id"), (source.text or "").strip(), Direction.INPUT))

        for assoc in _children(el, "dataOutputAssociation"):
            for target in _children(assoc, "targetRef"):
                associations.append(DataAssociation(el.get("id"), (target.text or "").strip(), Direction.OUTPUT))

    return associations


def extract_activities(model: ProcessModel, practice: str) -> List[Activity]:
    """One unclassified draft activity per task, event and gateway, in document order.

    Ids are numbered per element kind: ``SI-t1, SI-t2, SI-g1``.
    """
    if not PRACTICE_CODE_PATTERN.fullmatch(practice):
        raise MappingError(f"invalid practice code '{practice}'", [practice])

    labels = {element.id: element.label for element in model.data_objects}
    missing = sorted(
        {assoc.data_ref for assoc in model.data_associations if model.data_refs.get(assoc.data_ref) not in labels},
    )
    if missing:
        raise MappingError(
            "data association references missing data object: " + ", ".join(missing),
            missing,
        )

    inputs: Dict[str, set] = {}
    outputs: Dict[str, set] = {}
    for assoc in model.data_associations:
        artifact = labels[model.data_refs[assoc.data_ref]]
        target = inputs if assoc.direction == Direction.INPUT else outputs
        target.setdefault(assoc.element_id, set()).add(artifact)

    counters = {kind: 0 for kind in ActivityKind}
    drafts: List[Activity] = []
    for element in model.flow_elements:
        kind = DRAFT_KIND[element.kind]
        counters[kind] += 1
        drafts.append(
            Activity(
                id=f"{practice}-{kind.value}{counters[kind]}",
                practice=practice,
                requirement=model.process_id,
                name=element.label or element.id,
                automation=None,
                stages=frozenset(),
                inputs=frozenset(inputs.get(element.id, ())),
                outputs=frozenset(outputs.get(element.id, ())),
            ),
        )

    logger.info("Extracted %d draft activities for %s from process %s", len(drafts), practice, model.process_id)
    return drafts


def drafts_to_fragment(drafts: List[Activity]) -> Spec:
    return {
        "schema": CATALOG_SCHEMA,
        "activities": [draft.to_spec() for draft in drafts],
    }


def drafts_to_text(drafts: List[Activity]) -> str:
    return canonical_json(drafts_to_fragment(drafts))


def _element_kind(tag: str) -> Optional[ElementKind]:
    if tag in TASK_TAGS:
        return ElementKind.TASK
    if tag in EVENT_TAGS:
        return ElementKind.EVENT
    if tag in GATEWAY_TAGS:
        return ElementKind.GATEWAY
    return None


def _children(el, local_name: str):
    return [child for child in el if isinstance(child.tag, str) and _local_name(child) == local_name]


def _local_name(el) -> str:
    return etree.QName(el).localname


def _label(el) -> str:
    return (el.get("name") or "").strip()


def _byte_offset(xml: bytes, line: int, column: int) -> int:
    lines = xml.split(b"\n")
    if line < 1:
        return 0
    offset = sum(len(text) + 1 for text in lines[: line - 1])
    return min(offset + max(column - 1, 0), len(xml))
