import sys

import pytest

from synergid.kinematics import BodyModel


@pytest.fixture
def body():
    return BodyModel(trunk_length=0.5, c7_to_acromion=0.18, upper_arm_length=0.30,
                     forearm_plus_hand_length=0.40)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
