"""Time the path queries and the raster kernels on the bundled fixtures.

Prints best-of-N wall-clock times for q1 and q2 on the transfer network,
q3 and q4 on the monitored stretch network, and the D8 direction plus
accumulation kernels on a random elevation grid.
"""
import argparse
import sys
import time

import numpy as np

from hydrograph.drainage import flow_accumulation, flow_direction_d8
from hydrograph.grids import DemGrid
from hydrograph.queries import (
    q1_sources,
    q2_full_paths,
    q3_downstream_stations,
    q4_stations_same_watershed,
)
from hydrograph.store import NodeLabel
from hydrograph.synthetic import build_transfer_network, monitored_stretch_network


def best_of(fn, repeats):
    fn()
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed repetitions per entry (default 5)")
    parser.add_argument("--grid", type=int, default=100,
                        help="side length of the random DEM (default 100)")
    args = parser.parse_args(argv)

    graph, fixture = build_transfer_network()
    deepest = graph.by_domain_id(NodeLabel.WATER_NODE, fixture.deepest_id)
    member = graph.by_domain_id(NodeLabel.WATER_NODE,
                                fixture.longest_member_id)
    fx = monitored_stretch_network()

    rng = np.random.default_rng(7)
    data = rng.uniform(0.0, 100.0, size=(args.grid, args.grid))
    dem = DemGrid(data=data, xll=0.0, yll=0.0, cellsize=1.0)
    dirs = flow_direction_d8(dem)

    rows = [
        ("q1 source paths, deepest node",
         lambda: q1_sources(graph, deepest)),
        ("q2 full paths, longest-path member",
         lambda: q2_full_paths(graph, member)),
        ("q3 downstream stations",
         lambda: q3_downstream_stations(fx.graph, fx.query_stretch)),
        ("q4 same-watershed stations",
         lambda: q4_stations_same_watershed(fx.graph, fx.landuse)),
        (f"d8 directions, {args.grid}x{args.grid}",
         lambda: flow_direction_d8(dem)),
        (f"accumulation, {args.grid}x{args.grid}",
         lambda: flow_accumulation(dirs)),
    ]
    width = max(len(name) for name, _ in rows)
    for name, fn in rows:
        elapsed = best_of(fn, args.repeats)
        print(f"{name:<{width}}  {elapsed * 1000:8.2f} ms")
    return 0


if __name__ == "__main__":
    sys.exit(main())
