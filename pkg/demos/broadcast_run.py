"""A few broadcasts end to end, including a short trace."""

import io

from blindcast.broadcast import RunConfig, run_broadcast
from blindcast.topology import parse_graph

net = parse_graph("grid:6x6")
for cd in (False, True):
    recs = [run_broadcast(net, RunConfig(collision_detection=cd, seed=1, trial=k)) for k in range(10)]
    rounds = sorted(r.completion_round for r in recs)
    print("cd" if cd else "no-cd", "completion rounds", rounds)

# every round of a tiny run, as written by the tracer
buf = io.StringIO()
rec = run_broadcast(parse_graph("path:4"), RunConfig(seed=2, trace=True, trace_stream=buf))
print(buf.getvalue())
print(rec.to_json())
