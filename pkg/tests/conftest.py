import shutil

import pytest

from shotloc.config import load_config
from shotloc.pipeline import Pipeline
from shotloc.synthcase import build_case

_CRITERION_PREFIX = "test_criterion_"


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if not name.startswith(_CRITERION_PREFIX):
        return
    number, _, rest = name[len(_CRITERION_PREFIX):].partition("_")
    label = "PASS" if report.passed else "FAIL"
    print(f"[{label}] criterion {int(number)}: {rest.replace('_', ' ')}")


@pytest.fixture(scope="session")
def synth_case(tmp_path_factory):
    root = tmp_path_factory.mktemp("synthcase")
    return build_case(root, seed=0)


@pytest.fixture(scope="session")
def synth_config(synth_case):
    return load_config(synth_case.config_path)


@pytest.fixture(scope="session")
def thresholded_run(synth_case, synth_config):
    """A run with audio..threshold done; tests clone it instead of redoing it."""
    pipeline = Pipeline(synth_config, run_id="base")
    pipeline.run(["audio", "score", "rerank", "threshold"])
    return pipeline.run_dir


@pytest.fixture()
def cloned_run(thresholded_run, synth_config, request):
    """Copy of the thresholded run under a test-unique run id."""
    run_id = f"clone-{request.node.name[:40]}"
    dst = thresholded_run.parent / run_id
    if dst.exists():
        shutil.rmtree(dst)
    shutil.copytree(thresholded_run, dst)
    return run_id
