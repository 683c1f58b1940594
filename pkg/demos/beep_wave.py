"""Distance learning by beep-waves, checked against BFS."""

from blindcast.broadcast import NodeStates, beep_wave_step, run_beep_wave
from blindcast.topology import bfs, make_gnp, make_layered

net = make_layered(4, 3)
states = NodeStates.initial(net)
for r in range(1, 5):
    beep_wave_step(net, states, r)
    print(f"beep round {r} (global {2 * r - 1}): distances {states.distance.tolist()}")

# on random graphs the wave reproduces BFS exactly, collisions included
for seed in range(5):
    g = make_gnp(200, 0.02, seed=seed, directed=True)
    print(seed, (run_beep_wave(g) == bfs(g).dist).all())
