import numpy as np
import pytest

from projdebias.embeddings import EmbeddingSpace


def make_space(rows: dict, name: str = "fixture") -> EmbeddingSpace:
    return EmbeddingSpace(tuple(rows), np.array(list(rows.values()), dtype=float), name)


@pytest.fixture
def square_space():
    return make_space({"e": [1, 0], "n": [0, 1], "w": [-1, 0], "s": [0, -1]})


@pytest.fixture
def glove_file(tmp_path):
    path = tmp_path / "vec.txt"
    path.write_text("a 1 0\nb 0 1\nc 1 1\n", encoding="utf-8")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list = []


@pytest.fixture
def acceptance_report():
    """Record one pass/fail line per acceptance criterion; the lines are
    printed in the terminal summary."""

    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
