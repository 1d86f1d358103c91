import pytest

from s2c_compliance.catalog import ToolRef
from s2c_compliance.tool_matcher import AliasToolMatcher
from s2c_compliance.tool_matcher import ExactToolMatcher
from s2c_compliance.tool_matcher import ToolMatcher


@pytest.mark.parametrize(
    "invoked,expected",
    [("trivy", True), ("Trivy", False), ("trivy-action", False), ("", False)],
)
def test_exact_matcher(invoked, expected):
    assert ExactToolMatcher("trivy").matches(invoked) is expected


def test_alias_matcher():
    matcher = AliasToolMatcher("sonarqube", ["sonar-scanner", "sonarcloud"])

    assert matcher.matches("sonarqube")
    assert matcher.matches("sonar-scanner")
    assert matcher.matches("sonarcloud")
    assert not matcher.matches("sonar")


def test_from_tool_picks_matcher_by_aliases():
    assert isinstance(ToolMatcher.from_tool(ToolRef("trivy")), ExactToolMatcher)
    sonarqube = ToolRef("sonarqube", aliases=frozenset({"sonar-scanner"}))
    assert isinstance(ToolMatcher.from_tool(sonarqube), AliasToolMatcher)
    assert isinstance(ToolMatcher.for_name("behave"), ExactToolMatcher)


def test_sample_registry_aliases(sample_catalog):
    matchers = {tool.name: ToolMatcher.from_tool(tool) for tool in sample_catalog.tools}

    assert matchers["sonarqube"].matches("sonar-scanner")
    assert not matchers["semgrep"].matches("sonar-scanner")


def test_str_is_the_registry_name():
    assert str(ExactToolMatcher("trivy")) == "trivy"
    assert str(AliasToolMatcher("sonarqube", ["sonarcloud"])) == "sonarqube"
