import numpy as np
import pytest

from kobalab.domains import Ball, Ellipse, Polydisc, WHP


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


BOUNDED = [Ball(1), Ball(2), Ball(3), Polydisc(2), Ellipse((1, 2)), Ellipse((1, 1, 3)), Ellipse((2, 3))]


@pytest.fixture(params=BOUNDED, ids=lambda d: repr(d.to_json()))
def bounded_domain(request):
    return request.param


def siegel2():
    return WHP.siegel(2)


def random_ball_pair(rng, d, rmax=0.95):
    def pt():
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        return v / np.linalg.norm(v) * rmax * rng.uniform() ** (1 / (2 * d))

    return pt(), pt()


# acceptance summary: tests append "[PASS|FAIL] ..." lines through the ``acceptance`` fixture


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance(request):
    lines = request.config._acceptance_lines

    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title}" + (f" ({detail})" if detail else "")
        lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
