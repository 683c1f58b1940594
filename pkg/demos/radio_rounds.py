"""One synchronous round at a time, with and without collision detection."""

from blindcast.radio import ModelVariant, as_mask, format_trace, step
from blindcast.topology import make_layered

# source 0 -> {1, 2} -> 3
net = make_layered(2, [2, 1])
n = net.node_count

for cd in (False, True):
    variant = ModelVariant.for_network(net, cd)
    print("collision detection" if cd else "no collision detection")
    for r, tx in enumerate([{0}, {1}, {1, 2}, set()], start=1):
        outcome = step(net, variant, as_mask(n, tx), r)
        print("  ", format_trace(outcome))
    # node 3 with both 1 and 2 on air: C with detection, S without

# receptions can also be read node by node
out = step(net, ModelVariant.for_network(net, False), as_mask(n, [1]), 9)
print(out.reception(3), out.reception(2))
