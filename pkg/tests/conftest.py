import pytest

from vsnoffload.model import Allocation, AllocationProfile, FrameDistribution, ScenarioConfig


def lattice(points=400):
    return FrameDistribution([(k - 0.5) / points for k in range(1, points + 1)])


def two_by_two(C, P=(5.0, 5.0), overlap=0.1, **kw):
    return ScenarioConfig(transmission_coeffs=C, processing_coeffs=P, overlap=overlap, alpha_d=0.0, **kw)


@pytest.fixture
def prop1_cfg():
    # two sensors, two identical nodes, identical links
    return two_by_two(((1.0, 1.0), (1.0, 1.0)))


@pytest.fixture
def prop1_profile():
    a = Allocation((0, 1), (0.0, 6.1 / 11, 1.0))
    return AllocationProfile((a, a))


@pytest.fixture
def example1_cfg():
    # each sensor has one fast and one slow link, mirrored
    return two_by_two(((1.0, 2.0), (2.0, 1.0)))


@pytest.fixture
def example1_profile():
    return AllocationProfile((Allocation((0, 1), (0.0, 0.6, 1.0)), Allocation((1, 0), (0.0, 0.5, 1.0))))


@pytest.fixture
def empty2():
    return [FrameDistribution(), FrameDistribution()]


_ACCEPTANCE_LINES = []


@pytest.fixture
def report(capsys):
    """Print one acceptance line immediately and again in the final summary."""
    def emit(criterion, ok, detail):
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
        _ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
