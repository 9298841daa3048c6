# %% [markdown]
# # Reduced modulation dynamics
#
# b_s = -c b^2, lambda_s = -b lambda, (x1)_s = lambda, t_s = lambda^3.
# The sign of b0 decides between exit, a steady soliton and collapse; in the
# collapse case lambda ~ (T - t)^(1/(3-c)).

# %%
import numpy as np

from zkblowup.dynamics import (blowup_time, closed_form_lambda, fit_blowup_exponent,
                               integrate_ode, x1_law)

# %% the three regimes at c = 1.6632
for b0 in (-0.1, 0.0, 0.1):
    tr = integrate_ode(b0, c=1.6632, horizon=20.0)
    print(f"b0 {b0:+.1f}  regime {tr.regime:7s} stop {tr.stop_reason:12s} "
          f"lambda_end {tr.points[-1].lam:.3e}  drift of b/lambda^c {tr.invariant_drift():.1e}")

# %% against the closed form
tr = integrate_ode(0.1, c=1.6632, horizon=5.0)
t, lam = tr.array("t"), tr.array("lam")
print("max relative error", np.max(np.abs(lam - closed_form_lambda(0.1, 1.6632, t)) / lam))

# %% rate exponents and the behaviour of x1
print(" c       fit          1/(3-c)      T fit        T exact      x1")
for c in (0.5, 1.0, 1.6632, 1.9):
    tr = integrate_ode(0.1, c=c, horizon=1e6)
    fit = fit_blowup_exponent(tr)
    print(f"{c:<7g} {fit.exponent:.9f}  {1 / (3 - c):.9f}  {fit.blowup_time:.8f}  "
          f"{blowup_time(0.1, c):.8f}  {x1_law(tr).case}")
