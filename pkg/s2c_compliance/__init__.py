from s2c_compliance.automation import automation_potential
from s2c_compliance.automation import roadmap
from s2c_compliance.automation import summarize
from s2c_compliance.bpmn import extract_activities
from s2c_compliance.bpmn import parse_bpmn
from s2c_compliance.catalog import Activity
from s2c_compliance.catalog import ActivityCatalog
from s2c_compliance.catalog import load_catalog
from s2c_compliance.catalog import load_external_inputs
from s2c_compliance.catalog import query_activities
from s2c_compliance.catalog import save_catalog
from s2c_compliance.errors import ComplianceError
from s2c_compliance.graph import build_graph
from s2c_compliance.graph import check_stage_consistency
from s2c_compliance.helpers.spec import FIXTURE_160_CATALOG
from s2c_compliance.helpers.spec import SAMPLE_CATALOG
from s2c_compliance.helpers.spec import SAMPLE_EXTERNAL_INPUTS
from s2c_compliance.helpers.spec import data_path
from s2c_compliance.pipeline import assess
from s2c_compliance.pipeline import coverage_report
from s2c_compliance.pipeline import load_attestations
from s2c_compliance.pipeline import parse_pipeline
from s2c_compliance.report import render_gap_report
from s2c_compliance.report import render_s2c_overview
from s2c_compliance.types import AutomationLevel
from s2c_compliance.types import PipelineStage


def load_sample_catalog() -> ActivityCatalog:
    """The shipped IEC 62443-4-1 sample catalog (20 activities over the eight practices)."""
    return load_catalog(data_path(SAMPLE_CATALOG))


def load_sample_external_inputs():
    return load_external_inputs(data_path(SAMPLE_EXTERNAL_INPUTS))


def load_fixture_catalog() -> ActivityCatalog:
    """The constructed 160-activity catalog whose statistics match the reference automation summary (38/9/14/8/31 %)."""
    return load_catalog(data_path(FIXTURE_160_CATALOG))
