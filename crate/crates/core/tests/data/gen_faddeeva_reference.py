"""Regenerates faddeeva_reference.csv: w(z) = exp(-z^2) erfc(-iz) at 40 digits."""
import mpmath as mp
import numpy as np

mp.mp.dps = 40
rng = np.random.default_rng(20240611)
points = [0j, 1j, 2 + 1j, 0.5j, 5j, 1 + 0j, 3 + 0j, 10 + 0j]
for _ in range(800):
    r = 10 ** rng.uniform(-4, 4)
    th = rng.uniform(0, np.pi)
    points.append(complex(r * np.cos(th), r * np.sin(th)))
for _ in range(200):
    points.append(complex(rng.uniform(-10, 10), 10 ** rng.uniform(-6, 0)))
for _ in range(200):
    points.append(complex(rng.uniform(-6, 6), rng.uniform(0, 6)))

with open("faddeeva_reference.csv", "w") as f:
    f.write("z_re,z_im,w_re,w_im\n")
    for z in points:
        w = mp.exp(-mp.mpc(z) ** 2) * mp.erfc(-1j * mp.mpc(z))
        f.write(f"{z.real!r},{z.imag!r},{mp.nstr(w.real, 20)},{mp.nstr(w.imag, 20)}\n")
