from pathlib import Path

import pytest

from argconcept.taxonomy import Taxonomy, load_taxonomy, parse_taxonomy_lines

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
TOY_TAXONOMY = FIXTURES / "toy_taxonomy.tsv"
TOY_CORPUS = FIXTURES / "toy_corpus.conllu"
TOY_POSITIVES = FIXTURES / "toy_eval_positives.tsv"
TOY_OVERRIDES = FIXTURES / "toy_eval_overrides.tsv"
GOLDEN = FIXTURES / "golden"


def make_taxonomy(pairs, coverage_mode="direct"):
    lines = [f"{e}\t{c}" for e, c in pairs]
    surfaces, edges, counts = parse_taxonomy_lines(lines)
    return Taxonomy(surfaces, edges, counts, coverage_mode)


@pytest.fixture(scope="session")
def toy_tax():
    return load_taxonomy(TOY_TAXONOMY)


# One PASS/FAIL line per acceptance criterion, printed after the run.
ACCEPTANCE_RESULTS = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or not marker.args:
        return
    number, label = marker.args
    failed = report.failed or (report.when == "setup" and report.skipped)
    if report.when == "call" or failed:
        previous = ACCEPTANCE_RESULTS.get(number, (label, True))[1]
        ACCEPTANCE_RESULTS[number] = (label, previous and not failed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        label, ok = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {label}")
