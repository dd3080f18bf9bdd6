import os
import socket
import threading
import time

import pytest

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def fixture_path(*parts) -> str:
    return os.path.abspath(os.path.join(FIXTURES, *parts))


@pytest.fixture(scope="session")
def paper_patterns_path():
    return fixture_path("patterns", "paper.gcep")


@pytest.fixture(scope="session")
def response_pattern_path():
    return fixture_path("patterns", "response.gcep")


@pytest.fixture(scope="session")
def mhp_weekday_path():
    return fixture_path("scenarios", "mhp_weekday.json")


@pytest.fixture(scope="session")
def ab_small_path():
    return fixture_path("scenarios", "ab_small.json")


@pytest.fixture(scope="session")
def escalation_rules_path():
    return fixture_path("rules", "escalation.json")


@pytest.fixture(scope="session")
def weekday_run(tmp_path_factory, mhp_weekday_path, paper_patterns_path):
    """One shared 24 h mhp_weekday run (criterion 3/6 base artifact)."""
    from gridcep.harness.experiment import ExperimentSpec, run_experiment

    out = tmp_path_factory.mktemp("weekday")
    spec = ExperimentSpec(scenario=mhp_weekday_path, patterns=[paper_patterns_path],
                          duration=86400, out_dir=str(out))
    report = run_experiment(spec)
    return {"out": str(out), "report": report, "spec": spec}


@pytest.fixture(scope="module")
def live_server(ab_small_path, paper_patterns_path, response_pattern_path,
                escalation_rules_path):
    """Real uvicorn server on a free port (TestClient cannot stream SSE)."""
    import httpx
    import uvicorn

    from gridcep.harness.experiment import ExperimentSpec
    from gridcep.harness.service import build_app

    spec = ExperimentSpec(scenario=ab_small_path,
                          patterns=[paper_patterns_path, response_pattern_path],
                          rules=escalation_rules_path)
    app = build_app(spec, speed=0.0)
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{port}"
    for _ in range(200):
        try:
            httpx.get(base + "/sim", timeout=1)
            break
        except Exception:
            time.sleep(0.05)
    else:
        raise RuntimeError("server did not come up")
    yield base
    server.should_exit = True
    thread.join(timeout=5)
