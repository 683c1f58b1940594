"""How likely is exactly one of many weak coins to come up heads?"""

import numpy as np

from blindcast.coins import poisson_binomial_pmf, prob_exactly_one, single_tx_bound
from blindcast.harness import validate_single_tx_lemma

p = np.full(8, 0.25)            # f = 2
print(poisson_binomial_pmf(p).round(4))
print("exact", prob_exactly_one(p), "bound", single_tx_bound(p))

# worst ratio over a sweep of f for equal coins
for f in (0.5, 1, 2, 4, 8):
    q = np.full(int(f * 4), 0.25)
    print(f"f={f:4}: exact/bound = {prob_exactly_one(q) / single_tx_bound(q):.3f}")

print(validate_single_tx_lemma(trials=300))
