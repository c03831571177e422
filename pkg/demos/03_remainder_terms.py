"""
Remainder terms and the windowed R4 scan
========================================

"""

import numpy as np

from moebius import remainder

ev = remainder.evaluate([10**4, 10**6, 10**8])
for e in ev:
    print(e.X, "R =", round(e.R.value, 3), "R2* =", round(e.R2star.value, 3),
          "R3 =", round(e.R3.value, 3), "R4 =", round(e.R4.value, 3))

# sum_{n <= X} (Lambda*Lambda)(n), by the hyperbola method
print(remainder.lambda2_sum(10**6))

# |R2*(X)| against 1.93 sqrt(X) log X at log-spaced X
xs = np.unique(np.geomspace(10**3, 10**7, 20).astype(int))
worst = max(abs(e.R2star.value) / (1.93 * np.sqrt(e.X) * np.log(e.X)) for e in remainder.evaluate(xs))
print("max |R2*|/(1.93 sqrt X log X):", worst)

# the incremental window scan, with from-scratch recomputation every 10^5 steps
res = remainder.windowed_R4_scan((100, 3000), (10**7, 1.2 * 10**7), recompute_every=10**5)
print(res.max_ratio, res.witness_x, res.witness_side, res.recompute_checks, res.recompute_ok)

print("sum_{n<=1000} Lambda(n)/sqrt(n) =", remainder.lambda_sqrt_sum(1000))
print("aux1(462848) =", remainder.aux1_constant(462848))
