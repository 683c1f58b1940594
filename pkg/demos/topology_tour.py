"""Build the benchmark graphs and look at their BFS layers."""

import numpy as np

from blindcast.topology import bfs, load_edge_list, make_grid, make_layered, parse_graph, save_edge_list

grid = make_grid(4, 5)          # node id = row * cols + col, source in the corner
dm = bfs(grid)
print(dm.dist.reshape(4, 5))    # Manhattan distance from (0, 0)
print("eccentricity", dm.eccentricity)

# layered graphs are directed by default: each layer feeds the next completely
lay = make_layered(3, [2, 4, 1])
print(lay.node_count, "nodes", lay.edge_count, "arcs")
print("in-neighbors of the sink:", lay.in_neighbors(lay.node_count - 1))

# the same shorthands the CLI accepts
for s in ["path:6", "star:6", "clique:5", "gnp:40:0.05"]:
    g = parse_graph(s, seed=3)
    d = bfs(g).dist
    print(f"{s:12s} n={g.node_count:3d} D={d.max()} layer sizes={np.bincount(d).tolist()}")

# edge lists round trip
text = save_edge_list(grid)
print(text.splitlines()[0])
assert load_edge_list(text) == grid
