# %% [markdown]
# # Ground state and the linearized operators
#
# Petviashvili iteration for -Delta Q + Q - Q^3 = 0 on a periodic box, then
# the spectrum of L = -Delta + 1 - 3 Q^2 and of the weighted virial operator.
# N = 256 keeps this under a minute; N = 512 is the default golden grid.

# %%
import numpy as np

from zkblowup import OperatorSpec, make_grid, petviashvili
from zkblowup.grid import diff_array, lambda_array
from zkblowup.ground_state import energy, gradient_norm_sq, petviashvili_1d
from zkblowup.spectra import count_negative

N, L = 256, 20.0

# %% 1D sanity check: the cubic soliton is sqrt(2) sech(x)
x, q1, it = petviashvili_1d(2048, 40.0)
print("1D iterations", it, "max error", np.max(np.abs(q1 - np.sqrt(2) / np.cosh(x))))

# %% 2D ground state
gs = petviashvili(make_grid(N, N, L, L), tol=1e-12)
q = gs.q
print(f"iterations {gs.iterations}  residual {gs.residual_inf:.2e}  mass {gs.mass:.8f}")
print(f"Q(0) = {q.values.max():.6f}   E(Q)/|grad Q|^2 = {energy(q) / gradient_norm_sq(q):.1e}")

# %% mass under refinement, spectral against second-order differences
for n in (256, 512, 1024):
    m = petviashvili(make_grid(n, n, L, L), tol=1e-12, scheme="fd2").mass
    print(f"fd2 {n:5d}  mass {m:.7f}  gap to spectral {m - gs.mass:+.2e}")

# %% identities of L: translations in the kernel, L(Lambda Q) = -2 Q
op = OperatorSpec("linearized_L", q)
g = q.grid
for ax in ("x", "y"):
    d = diff_array(q.values, g, ax, 1)
    print(f"|L Q_{ax}| / |Q_{ax}| = {np.linalg.norm(op.apply(d)) / np.linalg.norm(d):.1e}")
r = op.apply(lambda_array(q.values, g)) + 2 * q.values
print(f"|L(Lambda Q) + 2Q| / |Q| = {np.linalg.norm(r) / np.linalg.norm(q.values):.1e}")

# %% one negative direction and a two-dimensional kernel
neg = count_negative(op)
print("L:", np.round(neg.eigenvalues, 8), "negatives", neg.count, "kernel", neg.kernel)

# %% the virial operator at alpha1 = 1.01: two negative eigenvalues, even then odd in y
vneg = count_negative(OperatorSpec("virial_L", q, 1.01))
print("virial:", np.round(vneg.eigenvalues, 6), [p.parity_y for p in vneg.pairs])
