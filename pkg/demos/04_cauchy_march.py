"""March ABC data off the plane z = 0 and recover f from the result."""
import numpy as np

from beltrami import CauchySlice, march, recover_f, verify_beltrami


def abc(x, y, z, A=1.0, B=1.0, C=0.5):
    return A * np.sin(z) + C * np.cos(y), B * np.sin(x) + A * np.cos(z), C * np.sin(y) + B * np.cos(x)


sl = CauchySlice.sample(abc, 64)
print("min |u3| on the slice:", np.abs(sl.u3).min())
res = march(sl, depth=0.2, steps=40)
print("mode:", res.mode, " factor:", res.factor)

X, Y, Z = res.field.grid.mesh()
print("max error against the exact flow:", np.abs(res.field.values - np.stack(abc(X, Y, Z))).max())
f = recover_f(res.field, spectral=True)
print("recovered f in [%.12f, %.12f]" % (f.values.min(), f.values.max()))
rep = verify_beltrami(res.field, f, order=4)
# f is constant up to rounding noise, so the u . grad f ratio only measures noise
print(f"residuals (order 4): curl {rep.curl_res:.2e}  div {rep.div_res:.2e}")

# marching is ill posed: high modes grow like exp(|k| depth) without the filter
for frac in (2 / 3, 1.0):
    noisy = CauchySlice(sl.u1 + 1e-10 * np.cos(31 * sl.coordinates()[0]), sl.u2, sl.u3)
    r = march(noisy, depth=1.0, steps=200, filter_frac=frac)
    err = np.abs(r.field.values[..., -1] - np.stack(abc(X[..., 0], Y[..., 0], 1.0 + 0 * X[..., 0]))).max()
    print(f"filter_frac={frac:.2f}: error at depth 1 = {err:.2e}")
