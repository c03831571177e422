"""
Recomputed constants, and resumable checkpoints
===============================================

"""

import tempfile
from pathlib import Path

from moebius import cli, verifier

for c in verifier.constant_checks():
    print(f"{c.name:<14} {c.status:<6} {c.computed:.6f}  (claimed {c.paper_value})")

# checkpoints: a resumed run writes exactly the same file
with tempfile.TemporaryDirectory() as d:
    d = Path(d)
    cli.run(["checkpoint", "--upto", "3000000", "--dir", str(d / "a")])
    cli.run(["checkpoint", "--upto", "1000000", "--dir", str(d / "b")])
    cli.run(["checkpoint", "--upto", "3000000", "--dir", str(d / "b"), "--workers", "2"])
    a = (d / "a" / "checkpoints.csv").read_bytes()
    b = (d / "b" / "checkpoints.csv").read_bytes()
    print("identical after resume:", a == b)
    print(a.decode().splitlines()[-1])
