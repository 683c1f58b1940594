"""The four exponent distributions and the transmit probabilities they induce."""

import numpy as np

from blindcast.coins import (Constants, Protocol, pmf_y1_table, pmf_y2_table, pmf_y3_table,
                             pmf_y4_table, sample_y2, transmit_prob, y3_shape)

T = 4096
tables = {
    "y1": pmf_y1_table(T, 1.0),
    "y2": pmf_y2_table(),
    "y3": pmf_y3_table(T, 1.0),
    "y4": pmf_y4_table(T),
}
for name, p in tables.items():
    y = np.arange(p.size)
    print(f"{name}: support {p.size - 1:6d}  P(x=0)={p[0]:.4f}  mean={np.dot(y, p):9.2f}  sum={p.sum():.15f}")

# the two-piece table: raw mass above one gets scaled back
print(y3_shape(2**30, 1.0))

# heavy tail: most draws are tiny, a few are huge
rng = np.random.default_rng(0)
x = sample_y2(rng, size=100_000)
print("y2 quantiles", np.quantile(x, [0.5, 0.9, 0.99, 0.999]))

# x becomes a per-node transmit probability 2^-x, Deep rescales by distance
c = Constants()
for d in (1, 4, 16):
    print("deep d=%2d  x=8 -> p=%.4f" % (d, transmit_prob(Protocol.DEEP, T, 8, d, c)))
print("general x=8 -> p=%.4f" % transmit_prob(Protocol.GENERAL, T, 8))
