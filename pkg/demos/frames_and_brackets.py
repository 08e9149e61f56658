"""
Moving frames, structure functions and the E matrix
===================================================

A coframe A(q) on the Heisenberg group.  Its frame fields do not commute,
and the failure to commute shows up as the E block of the symplectic form
written in quasi-momenta.
"""

import numpy as np

from movingframes import e_matrix, eval_frame, heisenberg_frame, structure_functions
from movingframes.cotangent import poisson_matrix, symplectic_matrix

frame = heisenberg_frame()
q = np.array([0.3, -1.2, 0.5])

A, B = eval_frame(frame, q)
print("coframe A(q):\n", A)
print("A B = I:", np.allclose(A @ B, np.eye(3)))

# [e_1, e_2] = gamma^I_12 e_I, the only nonzero bracket
gamma = structure_functions(frame, q).gamma
print("gamma[:, 0, 1] =", gamma[:, 0, 1])

# E_JK = -m_I gamma^I_JK, so E_12 tracks the third quasi-momentum
m = np.array([0.4, 0.1, 2.5])
E = e_matrix(q, m, frame)
print("E =\n", E.round(12))

# the symplectic and Poisson matrices in the moving frame are inverse
Om, P = symplectic_matrix(q, m, frame), poisson_matrix(q, m, frame)
print("Omega Lambda = I:", np.allclose(Om @ P, np.eye(6)))
