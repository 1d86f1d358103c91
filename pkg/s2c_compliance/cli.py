#!/usr/bin/env python3
import argparse
import logging
import os.path
import sys
from enum import IntEnum
from typing import List
from typing import Optional

from s2c_compliance.automation import roadmap
from s2c_compliance.automation import summarize
from s2c_compliance.bpmn import drafts_to_text
from s2c_compliance.bpmn import extract_activities
from s2c_compliance.bpmn import parse_bpmn
from s2c_compliance.catalog import load_catalog
from s2c_compliance.catalog import load_external_inputs
from s2c_compliance.catalog import unresolved_references
from s2c_compliance.errors import ComplianceError
from s2c_compliance.errors import FileAccessError
from s2c_compliance.errors import FilterError
from s2c_compliance.errors import FormatError
from s2c_compliance.errors import MappingError
from s2c_compliance.errors import UnclassifiedError
from s2c_compliance.errors import UnresolvedReferenceError
from s2c_compliance.graph import Severity
from s2c_compliance.graph import UNRESOLVED_REFERENCE
from s2c_compliance.graph import ValidationFinding
from s2c_compliance.graph import build_graph
from s2c_compliance.graph import check_stage_consistency
from s2c_compliance.graph import findings_to_json_lines
from s2c_compliance.graph import promote_warnings
from s2c_compliance.graph import sort_findings
from s2c_compliance.helpers.spec import SAMPLE_CATALOG
from s2c_compliance.helpers.spec import canonical_json
from s2c_compliance.helpers.spec import data_path
from s2c_compliance.helpers.spec import external_inputs_path
from s2c_compliance.helpers.spec import read_bytes
from s2c_compliance.helpers.spec import write_text
from s2c_compliance.pipeline import assess
from s2c_compliance.pipeline import load_attestations
from s2c_compliance.pipeline import parse_pipeline
from s2c_compliance.report import ReportFormat
from s2c_compliance.report import render_gap_report
from s2c_compliance.report import render_practice_specification
from s2c_compliance.report import render_s2c_overview
from s2c_compliance.report import roadmap_to_text
from s2c_compliance.report import summaries_to_text

logger = logging.getLogger(__name__)

GAP_REPORT_BASENAME = "gap-report"
GAP_REPORT_FORMATS = [ReportFormat.JSON, ReportFormat.MARKDOWN, ReportFormat.SVG]


class ExitStatus(IntEnum):
    SUCCESS = 0
    VALIDATION_FAILED = 1
    USAGE_ERROR = 2
    IO_ERROR = 3


def exit_status_for(error: ComplianceError) -> ExitStatus:
    if isinstance(error, FileAccessError):
        return ExitStatus.IO_ERROR
    if isinstance(error, (UnresolvedReferenceError, UnclassifiedError)):
        return ExitStatus.VALIDATION_FAILED
    return ExitStatus.USAGE_ERROR


def cmd_validate(args) -> ExitStatus:
    catalog = load_catalog(args.catalog, resolve_references=False)

    declared = frozenset()
    external_path = args.external_inputs or external_inputs_path(args.catalog)
    if args.external_inputs or os.path.exists(external_path):
        declared = load_external_inputs(external_path)

    findings: List[ValidationFinding] = []
    for offender in unresolved_references(catalog):
        subject, _, message = offender.partition(": ")
        findings.append(ValidationFinding.of(UNRESOLVED_REFERENCE, subject, f"undeclared {message}"))

    graph = build_graph(catalog, declared)
    findings += graph.findings
    findings += check_stage_consistency(graph, catalog)

    findings = promote_warnings(findings) if args.strict else sort_findings(findings)
    sys.stdout.write(findings_to_json_lines(findings))

    if any(finding.severity == Severity.ERROR for finding in findings):
        return ExitStatus.VALIDATION_FAILED
    return ExitStatus.SUCCESS


def cmd_stats(args) -> ExitStatus:
    catalog = load_catalog(args.catalog)
    sys.stdout.write(summaries_to_text(summarize(catalog), args.format))
    return ExitStatus.SUCCESS


def cmd_assess(args) -> ExitStatus:
    catalog = load_catalog(args.catalog)
    pipeline = parse_pipeline(args.pipeline)
    attestations = load_attestations(args.attestations) if args.attestations else []

    result = assess(pipeline, catalog, attestations)

    if args.out:
        written = _write_gap_reports(result, catalog, args.out)
        if ReportFormat.from_tag(args.format) == ReportFormat.JSON:
            sys.stdout.write(canonical_json({"coverage_percent": result.coverage_percent, "files": written}))
        else:
            sys.stdout.write("".join(f"{path}\n" for path in written))
    else:
        sys.stdout.write(render_gap_report(result, catalog, args.format).render())

    if result.coverage_percent < args.min_coverage:
        logger.error("Coverage %d%% is below the required %d%%", result.coverage_percent, args.min_coverage)
        return ExitStatus.VALIDATION_FAILED
    return ExitStatus.SUCCESS


def _write_gap_reports(result, catalog, out_dir: str) -> List[str]:
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise FileAccessError(out_dir, e.strerror or str(e)) from e

    written = []
    for report_format in GAP_REPORT_FORMATS:
        path = os.path.join(out_dir, f"{GAP_REPORT_BASENAME}.{report_format.extension}")
        write_text(path, render_gap_report(result, catalog, report_format).render())
        written.append(path)

    return written


def cmd_ingest_bpmn(args) -> ExitStatus:
    catalog = load_catalog(args.catalog)
    if args.practice not in catalog.practice_codes:
        raise MappingError(
            f"Unknown practice '{args.practice}'. Known practices: {', '.join(catalog.practice_codes)}",
            [args.practice],
        )

    model = parse_bpmn(read_bytes(args.bpmn))
    sys.stdout.write(drafts_to_text(extract_activities(model, args.practice)))
    return ExitStatus.SUCCESS


def cmd_roadmap(args) -> ExitStatus:
    catalog = load_catalog(args.catalog)
    unknown = sorted(activity_id for activity_id in args.exclude if catalog.activity(activity_id) is None)
    if unknown:
        raise FilterError(f"Unknown activities to exclude: {', '.join(unknown)}")

    sys.stdout.write(roadmap_to_text(roadmap(catalog, args.exclude), args.format))
    return ExitStatus.SUCCESS


def cmd_render(args) -> ExitStatus:
    catalog = load_catalog(args.catalog)
    if args.practice:
        text = render_practice_specification(catalog, args.practice)
    else:
        report_format = ReportFormat.from_tag(args.format)
        diagram = render_s2c_overview(catalog)
        if report_format == ReportFormat.SVG:
            text = diagram.svg
        elif report_format == ReportFormat.JSON:
            text = canonical_json(diagram.to_spec())
        elif report_format == ReportFormat.PLAIN_TEXT:
            text = diagram.text
        else:
            raise FormatError(f"The overview cannot be rendered as {report_format.value}")

    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return ExitStatus.SUCCESS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="s2c", description="Security-standard compliance for DevOps pipelines.")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log debug output to stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", help="Check a catalog and its orchestration graph")
    validate.add_argument("catalog", help="Catalog JSON file")
    validate.add_argument("--external-inputs", help="JSON list of artifacts that enter from outside")
    validate.add_argument("--strict", action="store_true", help="Treat warnings as errors")
    validate.set_defaults(handler=cmd_validate)

    stats = commands.add_parser("stats", help="Automation capabilities per practice")
    stats.add_argument("catalog", help="Catalog JSON file")
    stats.add_argument("--format", choices=["text", "json"], default="text")
    stats.set_defaults(handler=cmd_stats)

    assess_cmd = commands.add_parser("assess", help="Assess a pipeline against a catalog")
    assess_cmd.add_argument("catalog", help="Catalog JSON file")
    assess_cmd.add_argument("pipeline", help="Normalized pipeline YAML or JSON file")
    assess_cmd.add_argument("--attestations", help="Attestations JSON file")
    assess_cmd.add_argument("--out", help="Directory to write gap-report.json, .md and .svg to")
    assess_cmd.add_argument("--min-coverage", type=int, default=0, help="Fail when coverage is below this percent")
    assess_cmd.add_argument("--format", choices=["json", "markdown", "text"], default="json")
    assess_cmd.set_defaults(handler=cmd_assess)

    ingest = commands.add_parser("ingest-bpmn", help="Draft activities from a BPMN process model")
    ingest.add_argument("bpmn", help="BPMN 2.0 XML file")
    ingest.add_argument("--practice", required=True, help="Practice code the process belongs to, e.g. SI")
    ingest.add_argument("--catalog", default=data_path(SAMPLE_CATALOG), help="Catalog whose practices are accepted")
    ingest.set_defaults(handler=cmd_ingest_bpmn)

    roadmap_cmd = commands.add_parser("roadmap", help="Order activities for introduction into the pipeline")
    roadmap_cmd.add_argument("catalog", help="Catalog JSON file")
    roadmap_cmd.add_argument("--exclude", action="append", default=[], help="Activity id already in place")
    roadmap_cmd.add_argument("--format", choices=["text", "json"], default="text")
    roadmap_cmd.set_defaults(handler=cmd_roadmap)

    render = commands.add_parser("render", help="S2C pipeline overview or a practice specification")
    render.add_argument("catalog", help="Catalog JSON file")
    render.add_argument("--format", choices=["svg", "text", "json"], default="text")
    render.add_argument("--practice", help="Render the pipeline specification of this practice as Markdown")
    render.add_argument("--out", help="File to write instead of standard output")
    render.set_defaults(handler=cmd_render)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        return int(args.handler(args))
    except ComplianceError as e:
        print(f"error: {e}", file=sys.stderr)
        for detail in getattr(e, "errors", [])[1:]:
            print(f"error: {detail}", file=sys.stderr)
        return int(exit_status_for(e))


if __name__ == "__main__":
    sys.exit(main())
