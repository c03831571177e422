"""
Checking an explicit bound over a range of real X
=================================================

psi is a step function, so |psi(X) - X| / sqrt(X) can peak just *before*
a jump.  The scanner looks at both ends of every unit interval.
"""

from moebius import verifier

spec = verifier.lookup("boundRbis").with_range(302000, 303000)
rep = verifier.verify(spec)
print(rep.status, rep.witness_x, rep.witness_side, 0.71 * rep.ratio)

# restricted to integer X the same window passes
rep_int = verifier.verify(spec.on_integers())
print(rep_int.status, rep_int.witness_x, 0.71 * rep_int.ratio)

# a deliberately false bound fails with a witness
print(verifier.verify(verifier.fail_demo()).to_json(timing=False))

# a few catalog entries on reduced slices, in one shared pass
specs = [verifier.lookup(i).with_range(*r) for i, r in
         (("eq13", (33, 10**6)), ("thm1", (1798118, 3 * 10**6)), ("cor-m2", (463421, 617990)))]
print(verifier.summary_table(verifier.verify_many(specs)))
