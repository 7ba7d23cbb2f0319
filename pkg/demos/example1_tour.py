"""The unbounded sphere means of the log-corrected example near the origin.

Once the logarithmic factor is divided out, the sphere mean through the
origin grows like r^(1-n).  The gradient mass integral D(eps) keeps growing
like log log(e/eps) while its convergent cousin levels off.
"""
import math

from maxsobolev.verify import example1_divergence, example1_profile

prof = example1_profile(2)
print("   r        S(x)       v (grid)   v (radial)")
for row in prof.rows:
    print(f"{row['r']:.4f} {row['S']:11.4f} {row['v']:11.4f} {row['v_exact']:11.4f}")
print("corrected log-log slope, radial quadrature:",
      round(prof.fits["v_exact_corrected"]["slope"], 3), "(target -1)")
print("corrected log-log slope, grid quadrature:  ",
      round(prof.fits["v_corrected"]["slope"], 3))

div = example1_divergence(2)
cousin = example1_divergence(2, log_exponent=2.0)
print("\n   eps        D(eps)    cousin")
for a, b in zip(div.rows, cousin.rows):
    print(f"{a['eps']:.1e} {a['D']:9.4f} {b['D']:9.4f}")
fit = div.fits["D_vs_loglog"]
print(f"D ~ {fit['intercept']:.3f} + {fit['slope']:.4f} log log(e/eps), R^2 = {fit['r2']:.6f};"
      f" 2 pi = {2 * math.pi:.4f}")
