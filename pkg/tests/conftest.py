import json

import pytest

from synthaudit.data import TableSchema, write_csv
from synthaudit.fixtures import MIXED_SCHEMA, mixed_table
from synthaudit.preprocess import SplitSpec, split


@pytest.fixture(scope="session")
def mixed():
    return mixed_table()


@pytest.fixture(scope="session")
def mixed_split(mixed):
    return split(mixed, SplitSpec((0.4, 0.4, 0.2), 1))


@pytest.fixture
def write_schema(tmp_path):
    def _write(schema: TableSchema, name: str = "schema.json"):
        path = tmp_path / name
        path.write_text(json.dumps(schema.to_dict()))
        return str(path)

    return _write


@pytest.fixture
def mixed_files(tmp_path, mixed_split, write_schema):
    paths = {"schema": write_schema(MIXED_SCHEMA)}
    for name, part in mixed_split.parts().items():
        paths[name] = str(tmp_path / f"{name}.csv")
        write_csv(part, paths[name])
    return paths


# one line per acceptance criterion, printed after the test summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
