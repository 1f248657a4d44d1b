"""Multi-period binomial pricing, three ways.

1. the complementary-binomial closed form,
2. backward induction on the classical recombining tree,
3. a risk-neutral expectation on the 2^N-dimensional tensor market,
   where the state may be any product of disk states -- the answer
   does not depend on which one we pick.
"""

import numpy as np

from qmarket import (
    NPeriodSpec,
    apply_function,
    build_n_period,
    classical_tree_price,
    crr_price,
    expectation,
    product_martingale_state,
)

n, s0, k, r, a, b = 3, 100.0, 100.0, 0.05, -0.1, 0.2

print("closed form:      ", crr_price(n, s0, k, r, a, b))
print("tree induction:   ", classical_tree_price(n, s0, k, r, a, b))

spec = NPeriodSpec(n, a, b, r, s0)
market = build_n_period(spec)
payoff = apply_function(market.assets[0][n], lambda s: max(s - k, 0.0))

for bloch in ([[0.0, 0.0, 0.0]] * n, [[0.0, 0.4, -0.3]] * n, [[0.0, -0.2, 0.6]] * n):
    rho = product_martingale_state(spec, bloch)
    val = expectation(rho, payoff) / (1 + r) ** n
    print("tensor market (bloch {}): {}".format(bloch[0], val))
