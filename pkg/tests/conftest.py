"""Shared fixtures for the test suite."""
import csv
import io
import time
from types import SimpleNamespace

import pytest

from hydrograph.store import Graph
from hydrograph.synthetic import generate_efma_files, load_efma_files


def _pivot_long_to_wide(long_csv: bytes) -> str:
    """Reshape an exported long-format quality CSV back into the wide
    upload format, preserving the exact value text of every cell."""
    reader = csv.reader(io.StringIO(long_csv.decode("utf-8")))
    header = next(reader)
    assert header == ["station_id", "timestamp", "parameter", "value",
                      "below_detection", "depth_m"]
    cells: dict[tuple[str, str, str], dict[str, str]] = {}
    parameters: list[str] = []
    for station, timestamp, parameter, value, below, depth in reader:
        if parameter not in parameters:
            parameters.append(parameter)
        text = f"<{value}" if below == "true" else value
        cells.setdefault((station, timestamp, depth), {})[parameter] = text
    out = io.StringIO(newline="")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["station_id", "timestamp", "depth_m"] + parameters)
    for (station, timestamp, depth), values in cells.items():
        writer.writerow([station, timestamp, depth]
                        + [values.get(p, "") for p in parameters])
    return out.getvalue()


@pytest.fixture(scope="session")
def pivot_long_to_wide():
    return _pivot_long_to_wide


@pytest.fixture(scope="session")
def efma_dataset(tmp_path_factory):
    """The full synthetic dataset, generated once per test session."""
    directory = tmp_path_factory.mktemp("efma")
    start = time.perf_counter()
    manifest = generate_efma_files(directory)
    return SimpleNamespace(
        directory=directory,
        manifest=manifest,
        generate_seconds=time.perf_counter() - start,
    )


@pytest.fixture(scope="session")
def efma_loaded(efma_dataset):
    """The full dataset ingested with drainage analysis run, timed."""
    graph = Graph()
    start = time.perf_counter()
    result = load_efma_files(graph, efma_dataset.directory)
    return SimpleNamespace(
        graph=graph,
        result=result,
        ingest_seconds=time.perf_counter() - start,
        dataset=efma_dataset,
    )
