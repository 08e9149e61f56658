"""
Principal bundles: curvature and the block form of E
====================================================

For a connection frame (horizontal lifts plus group generators) the E
matrix splits into blocks.  The base block is the momentum map contracted
with curvature, the vertical block is the Lie-Poisson one.
"""

import numpy as np

from movingframes import e_matrix
from movingframes.bundles import (
    assemble_bundle_e,
    bundle_frame,
    curvature,
    heisenberg_bundle,
    jk_block,
    jk_block_direct,
    mixed_block,
    so3_bundle,
)

conn = heisenberg_bundle()
q, m = np.array([0.2, 0.9, -0.3]), np.array([0.5, -0.4, 2.3])
print("Heisenberg curvature:", curvature(conn, q, 0, 1))
print("J.K block:\n", jk_block(conn, q, m).round(9))

# assembly from blocks against the generic frame pipeline
conn = so3_bundle(invariant=False)
rng = np.random.default_rng(1)
q, m = rng.uniform(-1.0, 1.0, 5), rng.normal(size=5)
q[3] = 1.1
E_blocks = assemble_bundle_e(conn, q, m)
E_pipe = e_matrix(q, m, bundle_frame(conn))
print(f"two sides of J.K agree to {np.max(np.abs(jk_block(conn, q, m) - jk_block_direct(conn, q, m))):.1e}")
print(f"blocks vs pipeline: {np.max(np.abs(E_blocks - E_pipe)):.1e}")

# a non-invariant connection couples base and fiber
print("mixed block:\n", mixed_block(conn, q[:2], None, m).round(6))
