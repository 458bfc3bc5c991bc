"""
Two-user SISO rate regions
==========================

Superposition coding with SIC against orthogonal sharing, for a broadcast
channel and a multiple-access channel with SNRs of 10 dB and 0 dB.
"""

import numpy as np

from ngma import RegionSpec, bc_noma_boundary, bc_oma_boundary, mac_noma_boundary, mac_oma_boundary
from ngma.regions import bc_region_slack, mac_oma_tangent_share, mac_sum_face_gap

spec = RegionSpec.from_db(10, 0, power_budget=1.0, grid_points=1001)

# broadcast: every OMA point sits inside the superposition-coding region
bc_noma = bc_noma_boundary(spec)
bc_oma = bc_oma_boundary(spec)
print("BC NOMA endpoints:", bc_noma.points[0], bc_noma.points[-1])
print("smallest OMA margin below the NOMA boundary:",
      bc_region_slack(spec, bc_oma.points).min())

# how much R2 does OMA give up at R1 = 2 bit/s/Hz?
r2_noma = np.interp(2.0, bc_noma.r1, bc_noma.r2)
r2_oma = np.interp(2.0, bc_oma.r1, bc_oma.r2)
print(f"at R1 = 2: NOMA R2 = {r2_noma:.4f}, OMA R2 = {r2_oma:.4f}")

# multiple access: the pentagon and the single OMA touching point
mac_noma = mac_noma_boundary(spec)
mac_oma = mac_oma_boundary(spec)
gap = mac_sum_face_gap(spec, mac_oma.points)
best = int(np.argmin(gap))
print("MAC sum capacity:", mac_noma.points[1].sum())
print(f"OMA meets it at share {mac_oma_tangent_share(spec):.6f}, point {mac_oma.points[best]}")
print("second-closest OMA gap:", np.partition(gap, 1)[1])
