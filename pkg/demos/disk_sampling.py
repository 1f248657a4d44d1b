"""Where do the risk-neutral states live?

For the single-period qubit market they fill an open planar disk inside
the Bloch ball.  The plane is orthogonal to the Pauli direction of the
asset and its offset is set by the interest rate.  Sweep the rate and
watch the disk shrink toward the boundary.
"""

import numpy as np

from qmarket import QubitMarketSpec, risk_neutral_disk, sample_disk_states

for r in (0.05, 0.075, 0.1, 0.15, 0.19):
    spec = QubitMarketSpec(0.05, 0.15, 0.0, 0.0, r=r, s0=100.0)
    disk = risk_neutral_disk(spec)
    states = sample_disk_states(disk, 500, seed=1)
    min_eigs = [float(np.linalg.eigvalsh(s.mat)[0]) for s in states]
    print(
        "r = {:5.3f}  offset = {:+.4f}  radius = {:.6f}  min eig over samples = {:.4f}".format(
            r, disk.offset, disk.radius, min(min_eigs)
        )
    )
