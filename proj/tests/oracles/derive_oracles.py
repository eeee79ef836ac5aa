"""Independent brute-force derivation of the constants frozen in the unit tests.

Plain numpy, no library code. Run: python3 tests/oracles/derive_oracles.py
"""
import itertools
import json

import numpy as np


def grid(lo, hi, h, holes=()):
    n = [int(round((b - a) / h)) for a, b in zip(lo, hi)]
    pts = []
    for idx in itertools.product(*[range(k) for k in n]):
        p = np.array([lo[d] + (i + 0.5) * h for d, i in enumerate(idx)])
        if any(all(hl[d] < p[d] < hh[d] for d in range(len(lo))) for hl, hh in holes):
            continue
        pts.append(p)
    return np.array(pts)


def fd_grad(f, x, h=1e-6):
    g = np.zeros_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e.flat[k] = h
        g.flat[k] = (f(x + e) - f(x - e)) / (2 * h)
    return g


out = {}

# Grid with a central hole.
pts = grid([0, 0], [1, 1], 0.1, holes=[([0.3, 0.3], [0.7, 0.7])])
out["hole_grid_points"] = len(pts)
out["hole_grid_volume"] = len(pts) * 0.01

# Layers: columns with X1 < 0.15 on a 0.05 grid.
pts = grid([0, 0], [1, 1], 0.05)
out["layer_left_points"] = int(np.sum(pts[:, 0] < 0.15))
out["layer_left_columns"] = len(set(np.round(pts[pts[:, 0] < 0.15][:, 0], 12)))

# Four unit-square corners, volume 0.25 each, horizon 2.
X = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], float)
V = np.full(4, 0.25)
delta = 2.0
n1 = [[i for i in range(4) if i != a and np.linalg.norm(X[i] - X[a]) <= delta] for a in range(4)]
n2 = []
for a in range(4):
    c = 0
    for i, j in itertools.permutations(n1[a], 2):
        e1, e2 = X[i] - X[a], X[j] - X[a]
        if np.linalg.norm(X[j] - X[i]) <= delta and np.linalg.norm(np.cross(e1, e2)) > 1e-8 * np.linalg.norm(e1) * np.linalg.norm(e2):
            c += 1
    n2.append(c)
VH = [sum(V[i] for i in n1[a]) for a in range(4)]
out["corner_n1"] = len(n1[0])
out["corner_n2"] = n2[0]
out["corner_VH"] = VH[0]
out["corner_V1"] = VH[0] / len(n1[0])
out["corner_V2"] = VH[0] ** 2 / n2[0]


# Total energy of the corners under x = 1.1 X, one-neighbour only, C1 = 1.
def corner_energy(x):
    x = x.reshape(4, 3)
    e = 0.0
    for a in range(4):
        V1 = VH[a] / len(n1[a])
        for i in n1[a]:
            L = np.linalg.norm(X[i] - X[a])
            l = np.linalg.norm(x[i] - x[a])
            e += V[a] * 0.5 * (0.5 * L * (l / L - 1) ** 2) * V1
    return e


out["corner_energy_stretch_1_1"] = corner_energy(1.1 * X.flatten())

# Two points, one bond.
X2 = np.array([[0, 0, 0], [1, 0, 0]], float)
V2p = np.array([0.5, 0.5])


def two_energy(x):
    x = x.reshape(2, 3)
    L = 1.0
    l = np.linalg.norm(x[1] - x[0])
    psi = 0.5 * L * (l / L - 1) ** 2
    return V2p[0] * 0.5 * psi * V2p[1] + V2p[1] * 0.5 * psi * V2p[0]


x2 = np.array([[0, 0, 0], [2, 0, 0]], float).flatten()
out["two_point_energy"] = two_energy(x2)
out["two_point_variational_R"] = fd_grad(two_energy, x2).round(9).tolist()
# Collocation: sum over the bonds of C1 (1/L - 1/l) xi V1.
out["two_point_collocation_R"] = [0.5 * (1 - 0.5) * 2 * s for s in (1, -1)]

# Energy densities and force densities by finite differences of the energies.
out["psi1_C2_L1_l1.5"] = 0.5 * 2 * 1 * (1.5 / 1 - 1) ** 2
out["psi3_C1_V1_v2"] = 0.5 * 1 * 1 * (2 / 1 - 1) ** 2
psi1 = lambda xi: 0.5 * 1.0 * 1.0 * (np.linalg.norm(xi) - 1.0) ** 2
out["p1"] = fd_grad(psi1, np.array([2.0, 0, 0])).round(9).tolist()
psi2a = lambda av: 0.5 * 1.0 * 1.0 * (np.linalg.norm(av) - 1.0) ** 2
dpsi2 = fd_grad(psi2a, np.cross([2.0, 0, 0], [0, 1.0, 0]))
out["dpsi2_da"] = dpsi2.round(9).tolist()
out["pair_term"] = (2 * np.cross([0, 1.0, 0], dpsi2)).round(9).tolist()
psi3v = lambda v: 0.5 * 1.0 * 1.0 * (abs(v[0]) - 1.0) ** 2
s3 = fd_grad(psi3v, np.array([2.0]))[0]
out["dpsi3_dv"] = round(s3, 9)
out["triplet_term"] = (3 * s3 * np.cross([0, 1.0, 0], [0, 0, 1.0])).round(9).tolist()

# Removing one ordered pair: relative deviation of the second identity.
out["corrupted_pair_rel_err"] = 1.0 / n2[0]

print(json.dumps(out, indent=2))
