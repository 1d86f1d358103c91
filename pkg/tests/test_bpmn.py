import pytest
from lxml import etree

from s2c_compliance.bpmn import ElementKind
from s2c_compliance.bpmn import drafts_to_fragment
from s2c_compliance.bpmn import extract_activities
from s2c_compliance.bpmn import parse_bpmn
from s2c_compliance.errors import MappingError
from s2c_compliance.errors import SubsetError
from s2c_compliance.errors import XmlError
from s2c_compliance.helpers.spec import read_bytes

BPMN_HEADER = '<?xml version="1.0" encoding="UTF-8"?>\n'
DEFINITIONS = '<bpmn:definitions xmlns:bpmn="http://www.omg.org/spec/BPMN/20100524/MODEL" id="Defs">'


def bpmn_document(process_body: str, process_id: str = "SI-1") -> bytes:
    return (
        f'{BPMN_HEADER}{DEFINITIONS}<bpmn:process id="{process_id}">{process_body}</bpmn:process></bpmn:definitions>'
    ).encode("utf-8")


@pytest.fixture
def review_model(fixture_path):
    return parse_bpmn(read_bytes(fixture_path("si-1-review.bpmn")))


@pytest.fixture
def review_with_events_model(fixture_path):
    return parse_bpmn(read_bytes(fixture_path("si-1-review-events.bpmn")))


def count_tags(path: str, tags) -> int:
    root = etree.parse(path).getroot()
    return sum(len(root.xpath(f"//*[local-name()='{tag}']")) for tag in tags)


def test_parse_review_process(review_model):
    assert review_model.process_id == "SI-1"
    assert review_model.name == "Secure implementation review"
    assert [(element.id, element.kind) for element in review_model.flow_elements] == [
        ("Task_review", ElementKind.TASK),
        ("Task_fix", ElementKind.TASK),
        ("Gateway_findings", ElementKind.GATEWAY),
    ]
    assert sorted(element.label for element in review_model.data_objects) == ["review-record", "source-code"]
    assert review_model.flows == (
        ("Task_review", "Gateway_findings"),
        ("Gateway_findings", "Task_fix"),
        ("Task_fix", "Task_review"),
    )
    assert review_model.warnings == ()


def test_extract_review_activities(review_model):
    drafts = extract_activities(review_model, "SI")

    assert [(d.id, d.name, sorted(d.inputs), sorted(d.outputs)) for d in drafts] == [
        ("SI-t1", "Review code against coding standards", ["source-code"], ["review-record"]),
        ("SI-t2", "Fix review findings", ["review-record"], ["source-code"]),
        ("SI-g1", "Findings?", [], []),
    ]
    for draft in drafts:
        assert draft.practice == "SI"
        assert draft.requirement == "SI-1"
        assert draft.automation is None
        assert not draft.stages


def test_parse_review_process_with_events(review_with_events_model):
    assert [(element.id, element.kind) for element in review_with_events_model.flow_elements] == [
        ("Start_review", ElementKind.EVENT),
        ("Task_review", ElementKind.TASK),
        ("Gateway_findings", ElementKind.GATEWAY),
        ("Task_fix", ElementKind.TASK),
        ("End_review", ElementKind.EVENT),
    ]
    assert sorted(element.label for element in review_with_events_model.data_objects) == [
        "review-record",
        "source-code",
    ]
    assert len(review_with_events_model.flows) == 5
    assert review_with_events_model.warnings == ()


def test_extract_review_activities_with_events(review_with_events_model):
    drafts = extract_activities(review_with_events_model, "SI")

    assert [(d.id, d.name, sorted(d.inputs), sorted(d.outputs)) for d in drafts] == [
        ("SI-e1", "Review requested", [], []),
        ("SI-t1", "Review code against coding standards", ["source-code"], ["review-record"]),
        ("SI-g1", "Findings?", [], []),
        ("SI-t2", "Fix review findings", ["review-record"], ["source-code"]),
        ("SI-e2", "Review complete", [], []),
    ]


@pytest.mark.parametrize(
    "name,flow_tags",
    [
        ("si-1-review.bpmn", ("userTask", "manualTask", "exclusiveGateway")),
        ("si-1-review-events.bpmn", ("startEvent", "endEvent", "userTask", "manualTask", "exclusiveGateway")),
    ],
)
def test_draft_count_matches_flow_elements_in_xml(fixture_path, name, flow_tags):
    model = parse_bpmn(read_bytes(fixture_path(name)))

    assert len(extract_activities(model, "SI")) == count_tags(fixture_path(name), flow_tags)
    assert len(model.data_objects) == 2


def test_drafts_to_fragment_marks_drafts_unclassified(review_model):
    fragment = drafts_to_fragment(extract_activities(review_model, "SI"))

    assert fragment["schema"] == "s2c-catalog/1"
    assert {activity["automation"] for activity in fragment["activities"]} == {"unclassified"}
    assert fragment["activities"][0]["inputs"] == ["source-code"]


def test_malformed_xml_reports_location():
    with pytest.raises(XmlError) as e:
        parse_bpmn(b'<?xml version="1.0"?>\n<definitions>\n  <process id="p">\n</definitions>\n')

    assert e.value.line == 4
    assert e.value.offset > 0
    assert "line 4" in str(e.value)


def test_document_without_process_is_rejected():
    with pytest.raises(SubsetError):
        parse_bpmn(f"{BPMN_HEADER}{DEFINITIONS}</bpmn:definitions>".encode("utf-8"))


def test_unsupported_elements_are_skipped_with_warning():
    model = parse_bpmn(
        bpmn_document(
            '<bpmn:task id="A" name="Check"/>'
            '<bpmn:subProcess id="Sub" name="Nested"/>'
            '<bpmn:sequenceFlow id="F1" sourceRef="A" targetRef="Sub"/>',
        ),
    )

    assert [element.id for element in model.flow_elements] == ["A"]
    assert model.flows == ()
    assert len(model.warnings) == 2
    assert "subProcess" in model.warnings[0]


def test_only_first_process_is_read():
    xml = (
        f"{BPMN_HEADER}{DEFINITIONS}"
        '<bpmn:process id="first"><bpmn:task id="A" name="One"/></bpmn:process>'
        '<bpmn:process id="second"><bpmn:task id="B" name="Two"/></bpmn:process>'
        "</bpmn:definitions>"
    ).encode("utf-8")

    model = parse_bpmn(xml)

    assert model.process_id == "first"
    assert [element.id for element in model.flow_elements] == ["A"]
    assert "second" in model.warnings[0]


def test_empty_process_has_no_elements():
    model = parse_bpmn(bpmn_document(""))

    assert model.elements == ()
    assert model.flows == ()
    assert extract_activities(model, "SI") == []


@pytest.mark.parametrize(
    "body,repeated",
    [
        ('<bpmn:task id="A" name="one"/><bpmn:task id="A" name="two"/>', "A"),
        ('<bpmn:task id="A" name="one"/><bpmn:dataObject id="A" name="report"/>', "A"),
        ('<bpmn:task id="A"/><bpmn:exclusiveGateway id="G"/><bpmn:sequenceFlow id="G" sourceRef="A"/>', "G"),
    ],
    ids=["tasks", "task-and-data-object", "gateway-and-flow"],
)
def test_repeated_element_ids_are_rejected(body, repeated):
    with pytest.raises(SubsetError) as e:
        parse_bpmn(bpmn_document(body))

    assert str(e.value) == f"element id '{repeated}' is used more than once"


def test_process_without_flow_elements_yields_no_drafts():
    model = parse_bpmn(bpmn_document('<bpmn:dataObject id="D" name="report"/>'))
    assert extract_activities(model, "SI") == []


def test_association_to_missing_data_object_is_rejected():
    model = parse_bpmn(
        bpmn_document(
            '<bpmn:task id="A" name="Check">'
            '<bpmn:dataInputAssociation id="I1"><bpmn:sourceRef>missing</bpmn:sourceRef></bpmn:dataInputAssociation>'
            "</bpmn:task>",
        ),
    )

    with pytest.raises(MappingError) as e:
        extract_activities(model, "SI")

    assert e.value.missing == ["missing"]


def test_invalid_practice_code_is_rejected(review_model):
    with pytest.raises(MappingError):
        extract_activities(review_model, "si")


def test_ids_number_each_kind_separately():
    model = parse_bpmn(
        bpmn_document(
            '<bpmn:task id="A" name="a"/><bpmn:parallelGateway id="G" name="g"/>'
            '<bpmn:serviceTask id="B" name="b"/><bpmn:intermediateThrowEvent id="E" name="e"/>'
            '<bpmn:scriptTask id="C"/>',
        ),
    )

    drafts = extract_activities(model, "DM")
    assert [draft.id for draft in drafts] == ["DM-t1", "DM-g1", "DM-t2", "DM-e1", "DM-t3"]
    assert drafts[-1].name == "C"
