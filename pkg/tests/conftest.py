import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from anschat.ingestion import build_feed  # noqa: E402

# Interleaved conversation with mentions and acknowledgments (users Ana, Ben, Cal).
EXAMPLE_CHAT = [
    ("Ana", "<@Cal>: the patched 4.2.1 installer is up at <https://www.example.com/> and 3.9 comes next. "
            "The 3.7 branch suffered most from the flaky runners after the network outage"),
    ("Ben", "Are you at the meetup today?"),
    ("Cal", "<@Ana>: ok Thanks"),
    ("Ana", "Not anymore, the venue network keeps dropping so I moved to a cafe until these jobs finish"),
    ("Ben", "lol"),
    ("Ana", "turns out giving 300 engineers one wifi password breaks it"),
    ("Ben", "I saw that"),
    ("Cal", "<@Ana>: which upgrade path should I test first? Install old 4.2.1 release then upgrade to 5.0, "
            "or install old 4.2.1 and upgrade to build 812"),
    ("Ana", "<@Cal>: Install new 4.2.1 and upgrade to 5.0"),
    ("Cal", "ok"),
    ("Ana", "upgrading from the old 4.2.1 installer (or the old 3.9 one) won't work until the cleanup script lands "
            "because the old installers are the broken part"),
    ("Cal", "right gotcha"),
]


def example_chat_records(dt=60.0):
    return [
        {"id": f"r{i}", "ts": 1000.0 + dt * i, "user": user, "text": text}
        for i, (user, text) in enumerate(EXAMPLE_CHAT, 1)
    ]


@pytest.fixture
def example_chat_feed():
    return build_feed(example_chat_records())


_criteria = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria.append((marker.args[0], marker.args[1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome in sorted(_criteria):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2} [{verdict}] {title}")
