"""
Mertens and Chebyshev functions from a segmented sieve
======================================================

"""

import numpy as np

from moebius import sieve, summatory
from moebius.sieve import SegmentSpec

# mu on a short window, far from the origin
seg = sieve.sieve_mu(SegmentSpec(10**12, 10**12 + 20))
print(seg.mu)

# prime powers carry Lambda(n) = log p
for e in sieve.sieve_mangoldt(SegmentSpec(2, 30)):
    print(e.n, e.p, e.k, round(e.value, 4))

# one streaming pass gives every summatory function at once
st = summatory.state_at(10**6)
print("M(1e6)   =", st.integer("M"))
print("psi(1e6) =", st.value("psi"), "+-", st.error("psi"))
print("m(1e6)   =", st.value("m"), "+-", st.error("m"))

# whole arrays are handy for plotting or quick statistics
ints, sums, errs = summatory.summatory_arrays(10**5, ints=("M",), sums=("psi",))
M = ints["M"][1:]
x = np.arange(1, len(M) + 1)
print("max |M(n)|/sqrt(n) for n >= 33:", np.max(np.abs(M[32:]) / np.sqrt(x[32:])))

# the maximum of psi(x)/x is reached at x = 113
ratio = sums["psi"][1:] / x
print("argmax psi(x)/x:", int(np.argmax(ratio)) + 1, ratio.max())
