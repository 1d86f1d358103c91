import hashlib
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any
from typing import Dict
from typing import FrozenSet
from typing import List
from typing import Optional
from typing import Tuple
from typing import Union

from lxml import etree

from s2c_compliance.automation import AutomationSummary
from s2c_compliance.automation import RoadmapEntry
from s2c_compliance.automation import automation_potential
from s2c_compliance.automation import format_summary_table
from s2c_compliance.automation import roadmap
from s2c_compliance.automation import roadmap_iterations
from s2c_compliance.automation import summarize
from s2c_compliance.catalog import ActivityCatalog
from s2c_compliance.catalog import catalog_to_text
from s2c_compliance.errors import FilterError
from s2c_compliance.errors import FormatError
from s2c_compliance.helpers.spec import canonical_json
from s2c_compliance.pipeline import AssessmentResult
from s2c_compliance.pipeline import Verdict
from s2c_compliance.pipeline import coverage_report
from s2c_compliance.pipeline import export_result
from s2c_compliance.types import PipelineStage
from s2c_compliance.types import RepositoryKind
from s2c_compliance.types import Spec

logger = logging.getLogger(__name__)

REPORT_SCHEMA = "s2c-report/1"
OVERVIEW_SCHEMA = "s2c-overview/1"
SUMMARY_SCHEMA = "s2c-summary/1"
ROADMAP_SCHEMA = "s2c-roadmap/1"

SVG_NAMESPACE = "http://www.w3.org/2000/svg"

LABEL_COLUMN_WIDTH = 10
STAGE_COLUMN_WIDTH = 9
MARKER = "X"


class ReportFormat(Enum):
    MARKDOWN = "Markdown"
    JSON = "JSON"
    SVG = "SVG"
    PLAIN_TEXT = "PlainText"

    @property
    def extension(self) -> str:
        return _EXTENSIONS[self]

    @classmethod
    def from_tag(cls, tag: Union[str, "ReportFormat"]) -> "ReportFormat":
        if isinstance(tag, ReportFormat):
            return tag

        resolved = _FORMAT_TAGS.get(tag.strip().lower())
        if resolved is None:
            raise FormatError(f"Unsupported report format '{tag}'. Supported: {', '.join(sorted(_FORMAT_TAGS))}")
        return resolved


_EXTENSIONS = {
    ReportFormat.MARKDOWN: "md",
    ReportFormat.JSON: "json",
    ReportFormat.SVG: "svg",
    ReportFormat.PLAIN_TEXT: "txt",
}

_FORMAT_TAGS = {
    "markdown": ReportFormat.MARKDOWN,
    "md": ReportFormat.MARKDOWN,
    "json": ReportFormat.JSON,
    "svg": ReportFormat.SVG,
    "text": ReportFormat.PLAIN_TEXT,
    "plaintext": ReportFormat.PLAIN_TEXT,
}


@dataclass(frozen=True)
class ReportSection:
    """``content`` is the structured data of the section, ``rendered`` its text in the bundle's format.

    In SVG bundles ``rendered`` holds the lines of text the section draws.
    """

    id: str
    title: str
    content: Any
    rendered: str


@dataclass(frozen=True)
class ReportBundle:
    format: ReportFormat
    sections: Tuple[ReportSection, ...]
    fingerprints: Dict[str, str]

    def section(self, section_id: str) -> ReportSection:
        for section in self.sections:
            if section.id == section_id:
                return section

        raise KeyError(section_id)

    def render(self) -> str:
        if self.format == ReportFormat.JSON:
            return canonical_json(
                {
                    "schema": REPORT_SCHEMA,
                    "fingerprints": self.fingerprints,
                    "sections": {section.id: section.content for section in self.sections},
                },
            )

        if self.format == ReportFormat.SVG:
            return _gap_report_svg(self)

        return "\n".join(section.rendered for section in self.sections)


@dataclass(frozen=True)
class ContinuousPractice:
    code: str
    name: str
    start: PipelineStage
    end: PipelineStage

    @property
    def stages(self) -> List[PipelineStage]:
        """Stages from ``start`` to ``end``; a practice ending before it starts wraps around."""
        if self.start.index <= self.end.index:
            return [stage for stage in PipelineStage if self.start.index <= stage.index <= self.end.index]
        return [stage for stage in PipelineStage if stage.index >= self.start.index or stage.index <= self.end.index]


CONTINUOUS_PRACTICES: List[ContinuousPractice] = [
    ContinuousPractice("CI", "Continuous Integration", PipelineStage.CODE, PipelineStage.BUILD),
    ContinuousPractice("CDE", "Continuous Delivery", PipelineStage.CODE, PipelineStage.RELEASE),
    ContinuousPractice("CDP", "Continuous Deployment", PipelineStage.CODE, PipelineStage.DEPLOY),
    ContinuousPractice("CIF", "Continuous Improvement and Feedback", PipelineStage.MONITOR, PipelineStage.PLAN),
]


@dataclass(frozen=True)
class OverviewDiagram:
    standard_id: str
    version: str
    practices: Tuple[str, ...]
    markers: FrozenSet[Tuple[str, PipelineStage]]
    text: str
    svg: str

    def stages_of(self, practice: str) -> List[PipelineStage]:
        return [stage for stage in PipelineStage if (practice, stage) in self.markers]

    def to_spec(self) -> Spec:
        return {
            "schema": OVERVIEW_SCHEMA,
            "standard_id": self.standard_id,
            "version": self.version,
            "stages": [stage.value for stage in PipelineStage],
            "markers": {code: [stage.value for stage in self.stages_of(code)] for code in self.practices},
            "repositories": [kind.value for kind in RepositoryKind],
            "continuous_practices": [
                {"code": lane.code, "name": lane.name, "stages": [stage.value for stage in lane.stages]}
                for lane in CONTINUOUS_PRACTICES
            ],
        }


def render_s2c_overview(catalog: ActivityCatalog) -> OverviewDiagram:
    """The practice x stage grid: a marker wherever some activity of the practice takes place."""
    markers = frozenset(
        (activity.practice, stage) for activity in catalog.activities for stage in activity.stages
    )
    practices = tuple(catalog.practice_codes)
    return OverviewDiagram(
        standard_id=catalog.standard_id,
        version=catalog.version,
        practices=practices,
        markers=markers,
        text=_overview_text(catalog, practices, markers),
        svg=_overview_svg(catalog, practices, markers),
    )


def _grid_row(label: str, cells: List[str]) -> str:
    return f"{label:<{LABEL_COLUMN_WIDTH}}" + "".join(f"{cell:<{STAGE_COLUMN_WIDTH}}" for cell in cells)


def _overview_text(catalog: ActivityCatalog, practices, markers) -> str:
    lines = [
        f"S2C DevOps pipeline: {catalog.standard_id} {catalog.version}",
        "",
        _grid_row("practice", [stage.value for stage in PipelineStage]),
    ]
    for code in practices:
        lines.append(_grid_row(code, [MARKER if (code, stage) in markers else "" for stage in PipelineStage]))

    lines.append("")
    for lane in CONTINUOUS_PRACTICES:
        bar = "=" * (STAGE_COLUMN_WIDTH - 1)
        lines.append(_grid_row(lane.code, [bar if stage in lane.stages else "" for stage in PipelineStage]))

    lines += [
        "",
        "repositories: " + ", ".join(kind.value for kind in RepositoryKind),
        "",
        f"{MARKER} = an activity of the practice takes place in the stage",
    ]
    lines += [f"{lane.code} = {lane.name} ({lane.start.value} -> {lane.end.value})" for lane in CONTINUOUS_PRACTICES]
    return "\n".join(line.rstrip() for line in lines) + "\n"


# SVG geometry, in px
_MARGIN = 10
_LABEL_WIDTH = 110
_CELL_WIDTH = 80
_ROW_HEIGHT = 26
_PRACTICE_FILL = "#fff2a8"
_STAGE_FILL = "#c6e5b3"
_LANE_FILL = "#9cc3e6"


def _svg(tag: str, parent=None, text: Optional[str] = None, **attributes) -> etree._Element:
    qualified = f"{{{SVG_NAMESPACE}}}{tag}"
    attrs = {key.replace("_", "-"): str(value) for key, value in attributes.items()}
    if parent is None:
        element = etree.Element(qualified, attrs, nsmap={None: SVG_NAMESPACE})
    else:
        element = etree.SubElement(parent, qualified, attrs)

    if text is not None:
        element.text = text
    return element


def _svg_document(root: etree._Element) -> str:
    return etree.tostring(root, pretty_print=True, xml_declaration=True, encoding="UTF-8").decode("utf-8")


def _overview_svg(catalog: ActivityCatalog, practices, markers) -> str:
    stages = list(PipelineStage)
    rows = 1 + len(practices) + len(CONTINUOUS_PRACTICES) + 2
    width = 2 * _MARGIN + _LABEL_WIDTH + len(stages) * _CELL_WIDTH
    height = 2 * _MARGIN + (rows + 1) * _ROW_HEIGHT

    root = _svg("svg", version="1.1", width=width, height=height, viewBox=f"0 0 {width} {height}")
    _svg("title", root, text=f"S2C DevOps pipeline: {catalog.standard_id} {catalog.version}")
    _svg("text", root, text=f"S2C DevOps pipeline: {catalog.standard_id} {catalog.version}",
         x=_MARGIN, y=_MARGIN + 16, font_family="sans-serif", font_size=14, font_weight="bold")

    def cell_x(index: int) -> int:
        return _MARGIN + _LABEL_WIDTH + index * _CELL_WIDTH

    def row_y(row: int) -> int:
        return _MARGIN + (row + 1) * _ROW_HEIGHT

    for index, stage in enumerate(stages):
        _svg("rect", root, x=cell_x(index), y=row_y(0), width=_CELL_WIDTH, height=_ROW_HEIGHT,
             fill=_STAGE_FILL, stroke="#333333")
        _svg("text", root, text=stage.value, x=cell_x(index) + _CELL_WIDTH // 2, y=row_y(0) + 17,
             text_anchor="middle", font_family="sans-serif", font_size=12)

    for row, code in enumerate(practices, start=1):
        _svg("rect", root, x=_MARGIN, y=row_y(row), width=_LABEL_WIDTH, height=_ROW_HEIGHT,
             fill=_PRACTICE_FILL, stroke="#333333")
        _svg("text", root, text=code, x=_MARGIN + 8, y=row_y(row) + 17, font_family="sans-serif", font_size=12)
        for index, stage in enumerate(stages):
            _svg("rect", root, x=cell_x(index), y=row_y(row), width=_CELL_WIDTH, height=_ROW_HEIGHT,
                 fill="none", stroke="#cccccc")
            if (code, stage) in markers:
                _svg("circle", root, cx=cell_x(index) + _CELL_WIDTH // 2, cy=row_y(row) + _ROW_HEIGHT // 2,
                     r=7, fill="#333333")

    for offset, lane in enumerate(CONTINUOUS_PRACTICES):
        row = 1 + len(practices) + offset
        _svg("text", root, text=lane.code, x=_MARGIN + 8, y=row_y(row) + 17, font_family="sans-serif", font_size=12)
        for index, stage in enumerate(stages):
            if stage in lane.stages:
                _svg("rect", root, x=cell_x(index) + 2, y=row_y(row) + 8, width=_CELL_WIDTH - 4, height=10,
                     fill=_LANE_FILL)

    footer = row_y(1 + len(practices) + len(CONTINUOUS_PRACTICES)) + 17
    _svg("text", root, text="repositories: " + ", ".join(kind.value for kind in RepositoryKind),
         x=_MARGIN, y=footer, font_family="sans-serif", font_size=11)
    legend = "  ".join(f"{lane.code} = {lane.name}" for lane in CONTINUOUS_PRACTICES)
    _svg("text", root, text=legend, x=_MARGIN, y=footer + _ROW_HEIGHT, font_family="sans-serif", font_size=11)

    return _svg_document(root)


def fingerprint(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def render_gap_report(
    result: AssessmentResult,
    catalog: ActivityCatalog,
    format: Union[ReportFormat, str],
) -> ReportBundle:
    """Executive summary, per-practice coverage, the gaps in roadmap order and the evidence manifest."""
    report_format = ReportFormat.from_tag(format)

    rows = coverage_report(result, catalog)
    global_summary = summarize(catalog)[-1]
    gaps = [entry for entry in roadmap(catalog) if result.per_activity.get(entry.activity_id) == Verdict.GAP]

    summary = {
        "pipeline": result.pipeline_name,
        "standard_id": catalog.standard_id,
        "catalog_version": catalog.version,
        "activities": len(result.per_activity),
        "coverage_percent": result.coverage_percent,
        "automation_potential": automation_potential(global_summary),
        "verdicts": rows[-1].to_spec()["counts"],
    }
    gap_list = [
        {
            "rank": entry.rank,
            "activity": entry.activity_id,
            "name": catalog.activity(entry.activity_id).name,
            "automation": entry.automation.value,
            "rationale": entry.rationale,
        }
        for entry in gaps
    ]
    evidence = [record.to_spec() for record in result.evidence_manifest]

    fingerprints = {
        "catalog": fingerprint(catalog_to_text(catalog)),
        "assessment": fingerprint(export_result(result)),
    }

    contents = [
        ("summary", "Executive summary", summary),
        ("practices", "Coverage per practice", [row.to_spec() for row in rows]),
        ("gaps", "Gaps in roadmap order", gap_list),
        ("evidence", "Evidence manifest", evidence),
    ]

    renderer = _SECTION_RENDERERS[report_format]
    sections = [
        ReportSection(section_id, title, content, renderer(section_id, title, content, fingerprints))
        for section_id, title, content in contents
    ]

    logger.debug("Rendered %s gap report with %d gaps", report_format.value, len(gaps))
    return ReportBundle(report_format, tuple(sections), fingerprints)


def _cell(value: Any) -> str:
    return str(value).replace("|", "\\|")


def _markdown_table(header: List[str], rows: List[List[Any]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(_cell(value) for value in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def _markdown_section(section_id: str, title: str, content: Any, fingerprints: Dict[str, str]) -> str:
    if section_id == "summary":
        verdicts = ", ".join(f"{name} {count}" for name, count in content["verdicts"].items())
        return (
            f"# Compliance gap report: {content['pipeline']}\n\n"
            f"Standard {content['standard_id']} ({content['catalog_version']}); "
            f"catalog {fingerprints['catalog']}, assessment {fingerprints['assessment']}.\n\n"
            f"## {title}\n\n"
            f"- Coverage: {content['coverage_percent']}%\n"
            f"- Automation potential: {content['automation_potential']}%\n"
            f"- Activities: {content['activities']} ({verdicts})\n"
        )

    if section_id == "practices":
        header = ["Practice"] + [verdict.value for verdict in Verdict] + ["Coverage"]
        rows = [
            [row["scope"]] + [row["counts"][verdict.value] for verdict in Verdict] + [f"{row['coverage_percent']}%"]
            for row in content
        ]
        return f"## {title}\n\n" + _markdown_table(header, rows)

    if section_id == "gaps":
        if not content:
            return f"## {title}\n\nNo gaps.\n"
        rows = [[gap["rank"], gap["activity"], gap["name"], gap["automation"], gap["rationale"]] for gap in content]
        return f"## {title}\n\n" + _markdown_table(["Rank", "Activity", "Name", "Automation", "Next step"], rows)

    if not content:
        return f"## {title}\n\nNo evidence recorded.\n"
    rows = [[record["activity"], record["reference"]] for record in content]
    return f"## {title}\n\n" + _markdown_table(["Activity", "Evidence"], rows)


def _text_section(section_id: str, title: str, content: Any, fingerprints: Dict[str, str]) -> str:
    lines = [title, "-" * len(title)]
    if section_id == "summary":
        lines = [f"Compliance gap report: {content['pipeline']}", ""] + lines
        lines += [
            f"standard:              {content['standard_id']} ({content['catalog_version']})",
            f"coverage:              {content['coverage_percent']}%",
            f"automation potential:  {content['automation_potential']}%",
            f"activities:            {content['activities']}",
        ]
        lines += [f"  {name:<20} {count}" for name, count in content["verdicts"].items()]
        lines += [f"{name} fingerprint: {value}" for name, value in fingerprints.items()]

    elif section_id == "practices":
        lines.append(f"{'scope':<8}" + "".join(f"{verdict.value:>20}" for verdict in Verdict) + f"{'coverage':>10}")
        for row in content:
            counts = "".join(f"{row['counts'][verdict.value]:>20}" for verdict in Verdict)
            lines.append(f"{row['scope']:<8}{counts}{row['coverage_percent']:>9}%")

    elif section_id == "gaps":
        lines += [f"{gap['rank']:>4}  {gap['activity']:<10} {gap['automation']:<18} {gap['name']}" for gap in content]
        if not content:
            lines.append("no gaps")

    else:
        lines += [f"{record['activity']:<10} {record['reference']}" for record in content]
        if not content:
            lines.append("no evidence recorded")

    return "\n".join(lines) + "\n"


def _json_section(section_id: str, title: str, content: Any, fingerprints: Dict[str, str]) -> str:
    return canonical_json(content)


def _svg_section(section_id: str, title: str, content: Any, fingerprints: Dict[str, str]) -> str:
    lines = [title]
    if section_id == "summary":
        verdicts = ", ".join(f"{name} {count}" for name, count in content["verdicts"].items())
        lines += [
            f"Pipeline {content['pipeline']} against {content['standard_id']} ({content['catalog_version']})",
            f"Coverage: {content['coverage_percent']}%",
            f"Automation potential: {content['automation_potential']}%",
            f"Activities: {content['activities']} ({verdicts})",
            f"Catalog {fingerprints['catalog']}",
        ]

    elif section_id == "practices":
        lines += [f"{row['scope']}: {row['coverage_percent']}%" for row in content]

    elif section_id == "gaps":
        lines += [f"{gap['rank']}. {gap['activity']} ({gap['automation']}): {gap['name']}" for gap in content]
        if not content:
            lines.append("No gaps.")

    else:
        lines += [f"{record['activity']}: {record['reference']}" for record in content]
        if not content:
            lines.append("No evidence recorded.")

    return "\n".join(lines) + "\n"


_SECTION_RENDERERS = {
    ReportFormat.MARKDOWN: _markdown_section,
    ReportFormat.PLAIN_TEXT: _text_section,
    ReportFormat.JSON: _json_section,
    ReportFormat.SVG: _svg_section,
}

_VERDICT_FILLS = {
    Verdict.SATISFIED_AUTOMATED: "#2e7d32",
    Verdict.SATISFIED_ATTESTED: "#81c784",
    Verdict.PARTIALLY_COVERED: "#ffb74d",
    Verdict.GAP: "#e57373",
}
_BAR_PX = 400
_LINE_HEIGHT = 16
_SVG_TEXT_SECTIONS = ("summary", "gaps", "evidence")


def _gap_report_svg(bundle: ReportBundle) -> str:
    """Coverage bars per practice, then the summary, gap list and evidence as text blocks."""
    summary = bundle.section("summary").content
    rows = bundle.section("practices").content
    blocks = [bundle.section(section_id) for section_id in _SVG_TEXT_SECTIONS]

    legend_y = _MARGIN + (len(rows) + 2) * _ROW_HEIGHT
    text_lines = sum(len(block.rendered.splitlines()) + 1 for block in blocks)
    width = 2 * _MARGIN + _LABEL_WIDTH + _BAR_PX + 60
    height = legend_y + _ROW_HEIGHT + text_lines * _LINE_HEIGHT + _MARGIN
    root = _svg("svg", version="1.1", width=width, height=height, viewBox=f"0 0 {width} {height}")
    title = f"Coverage of {summary['standard_id']} by {summary['pipeline']}: {summary['coverage_percent']}%"
    _svg("title", root, text=title)
    _svg("text", root, text=title, x=_MARGIN, y=_MARGIN + 16, font_family="sans-serif", font_size=14,
         font_weight="bold")

    bars = _svg("g", root, id="practices")
    for index, row in enumerate(rows, start=1):
        y = _MARGIN + index * _ROW_HEIGHT + 4
        _svg("text", bars, text=row["scope"], x=_MARGIN, y=y + 14, font_family="sans-serif", font_size=12)

        done = 0
        for verdict in Verdict:
            start, done = _scaled(done, row["total"]), done + row["counts"][verdict.value]
            segment = _scaled(done, row["total"]) - start
            if segment:
                _svg("rect", bars, x=_MARGIN + _LABEL_WIDTH + start, y=y, width=segment, height=18,
                     fill=_VERDICT_FILLS[verdict])
        _svg("text", bars, text=f"{row['coverage_percent']}%", x=_MARGIN + _LABEL_WIDTH + _BAR_PX + 8, y=y + 14,
             font_family="sans-serif", font_size=12)

    for index, verdict in enumerate(Verdict):
        x = _MARGIN + index * 140
        _svg("rect", bars, x=x, y=legend_y, width=12, height=12, fill=_VERDICT_FILLS[verdict])
        _svg("text", bars, text=verdict.value, x=x + 16, y=legend_y + 11, font_family="sans-serif", font_size=11)

    y = legend_y + _ROW_HEIGHT
    for block in blocks:
        group = _svg("g", root, id=block.id)
        heading, *lines = block.rendered.splitlines()
        y += _LINE_HEIGHT
        _svg("text", group, text=heading, x=_MARGIN, y=y, font_family="sans-serif", font_size=12, font_weight="bold")
        for line in lines:
            y += _LINE_HEIGHT
            _svg("text", group, text=line, x=_MARGIN, y=y, font_family="sans-serif", font_size=11)
        y += _LINE_HEIGHT // 2

    return _svg_document(root)


def _scaled(count: int, total: int) -> int:
    """Half-up integer position of ``count`` on a bar of _BAR_PX pixels."""
    if not total:
        return 0
    return (2 * count * _BAR_PX + total) // (2 * total)


def render_practice_specification(catalog: ActivityCatalog, practice: str) -> str:
    """Markdown pipeline specification of one practice: its activities with I/O, automation, tools and stages."""
    found = catalog.practice(practice)
    if found is None:
        raise FilterError(f"Unknown practice '{practice}'. Known practices: {', '.join(catalog.practice_codes)}")

    rows = [
        [
            activity.id,
            activity.requirement,
            activity.name,
            ", ".join(sorted(activity.inputs)) or "-",
            ", ".join(sorted(activity.outputs)) or "-",
            activity.automation.value if activity.automation else "unclassified",
            ", ".join(sorted(activity.tools)) or "-",
            ", ".join(stage.value for stage in sorted(activity.stages, key=lambda stage: stage.index)) or "-",
        ]
        for activity in catalog.activities_of(found.code)
    ]
    header = ["Activity", "Requirement", "Name", "Inputs", "Outputs", "Automation", "Tools", "Stages"]
    return f"# {found.code}: {found.name}\n\nPipeline specification for {catalog.standard_id}.\n\n" + _markdown_table(
        header,
        rows,
    )


def summaries_to_text(summaries: List[AutomationSummary], format: Union[ReportFormat, str]) -> str:
    report_format = ReportFormat.from_tag(format)
    if report_format == ReportFormat.JSON:
        return canonical_json({"schema": SUMMARY_SCHEMA, "summaries": [summary.to_spec() for summary in summaries]})
    if report_format == ReportFormat.PLAIN_TEXT:
        return format_summary_table(summaries)

    raise FormatError(f"Summaries cannot be rendered as {report_format.value}")


def roadmap_to_text(entries: List[RoadmapEntry], format: Union[ReportFormat, str]) -> str:
    """Iteration plan: one block per automation level, most automatable first."""
    report_format = ReportFormat.from_tag(format)
    if report_format == ReportFormat.JSON:
        iterations = [
            {
                "iteration": number,
                "automation": level.value,
                "activities": [entry.to_spec() for entry in entries_of],
            }
            for number, (level, entries_of) in enumerate(roadmap_iterations(entries), start=1)
        ]
        return canonical_json({"schema": ROADMAP_SCHEMA, "iterations": iterations})

    if report_format != ReportFormat.PLAIN_TEXT:
        raise FormatError(f"Roadmaps cannot be rendered as {report_format.value}")

    lines: List[str] = []
    for number, (level, entries_of) in enumerate(roadmap_iterations(entries), start=1):
        if lines:
            lines.append("")
        lines.append(f"Iteration {number}: {level.label} ({len(entries_of)} activities)")
        lines.append(f"  {entries_of[0].rationale}")
        lines += [f"  {entry.rank:>4}  {entry.activity_id}" for entry in entries_of]

    return "\n".join(lines) + "\n" if lines else ""
