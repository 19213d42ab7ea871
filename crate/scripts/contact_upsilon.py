"""Grading direction Z - Upsilon for the two-eigenvalue contact model.

Independent of the Rust crate. For the frame of `contact_two_eigen_model`
it computes at the base point p:

  beta     annihilator of E, scaled so that sup d(beta)(v, w) = 1 over unit v, w in E,
  J        from d(beta)(v, w) = <v, Lambda J w> with d(beta)(v, w) = beta([v, w]) on E,
           the orientation for which [X, JX] = -lambda Z mod E,
  Z        Reeb field: d(beta)(Z, .) = 0 and beta(Z) = 1,
  Upsilon  1/2 sum_j sum_{i != j} lambda_i / (|chi|^2 - lambda_j^2 k_j) tr_{E_i} pr0_j [., J .],

and prints (Z - Upsilon)(p) as exact rationals, one component per line.

Usage: contact_upsilon.py [p1 p2 p3 p4 p5]   (default: the fixture base point)
"""

import sys

import sympy as sp

x = sp.symbols("x1:6")
phi = 1 + x[0] + x[2]
h = 1 + x[4]
fields = [
    [phi, 0, 0, 0, -x[1] / 2 * h * phi],
    [0, phi, 0, 0, x[0] / 2 * h * phi],
    [0, 0, phi, 0, -x[3] / 4 * h * phi],
    [0, 0, 0, phi, x[2] / 4 * h * phi],
]
blocks = [(0, 1), (2, 3)]  # E_1 = span{X1, X2}, E_2 = span{X3, X4}, k = (1, 1)
default_point = ["1/2", "-1", "1/3", "1", "1/4"]
point = dict(zip(x, [sp.Rational(a) for a in (sys.argv[1:6] or default_point)]))


def bracket(a, b):
    return [
        sp.expand(sum(a[j] * sp.diff(b[i], x[j]) - b[j] * sp.diff(a[i], x[j]) for j in range(5)))
        for i in range(5)
    ]


frame = sp.Matrix(fields).T
brackets = {(a, b): sp.Matrix(bracket(fields[a], fields[b])) for a in range(4) for b in range(4)}

beta = frame.T.nullspace()[0].T
beta = beta / beta[4]
omega_p = sp.Matrix(4, 4, lambda a, b: (beta * brackets[(a, b)])[0]).subs(point)
lam_max = max(abs(sp.im(e)) for e in omega_p.eigenvals())
beta = beta / lam_max
omega_p = omega_p / lam_max
if omega_p[0, 1] < 0:  # orient beta so that beta([X1, X2]) > 0
    beta = -beta
    omega_p = -omega_p
lam = [abs(omega_p[a, b]) for a, b in blocks]
for a in range(4):
    for b in range(4):
        inside = any({a, b} <= set(blk) for blk in blocks)
        assert inside or omega_p[a, b] == 0, "E_1 and E_2 are not d(beta)-orthogonal"

# Reeb field at p
d_beta = sp.Matrix(5, 5, lambda i, j: sp.diff(beta[j], x[i]) - sp.diff(beta[i], x[j])).subs(point)
bp = beta.subs(point)
z, params = d_beta.T.col_join(bp).gauss_jordan_solve(sp.Matrix([0, 0, 0, 0, 0, 1]))
assert not params, "Reeb field is not unique"

xp = frame.subs(point)


def j_of(a):
    # J X_a = sign * X_b on the block of a, from omega = Lambda J
    for p, q in blocks:
        if a == p:
            return q, sp.sign(-omega_p[p, q])
        if a == q:
            return p, sp.sign(omega_p[p, q])
    raise ValueError(a)


def pr0(v, j):
    # projection to E along Z, then orthogonal projection to E_j
    coeffs = sp.Matrix.hstack(xp, z).solve(v)
    return sum((coeffs[a] * xp[:, a] for a in blocks[j]), sp.zeros(5, 1))


for a in range(4):
    b, s = j_of(a)
    v = s * brackets[(a, b)].subs(point)
    i = next(k for k, blk in enumerate(blocks) if a in blk)
    assert (bp * v)[0] == -lam[i], "[X, JX] != -lambda Z mod E"

chi2 = sum(l**2 for l in lam)
upsilon = sp.zeros(5, 1)
for j in range(2):
    for i in range(2):
        if i == j:
            continue
        tr = sp.zeros(5, 1)
        for a in blocks[i]:
            b, s = j_of(a)
            tr += s * pr0(brackets[(a, b)].subs(point), j)
        upsilon += sp.Rational(1, 2) * lam[i] / (chi2 - lam[j] ** 2) * tr

for c in z - upsilon:
    print(sp.nsimplify(c))
