"""Arbitrary-precision reference values frozen into the Rust test suite.

Run with `python3 generate.py` (needs mpmath). Every value printed here is
pasted verbatim into the tests; none is computed by the crate itself.
"""
import mpmath as mp

mp.mp.dps = 40


def airy_all(x):
    x = mp.mpf(x)
    return (mp.airyai(x), mp.airyai(x, derivative=1),
            mp.airybi(x), mp.airybi(x, derivative=1))


def fmt(v):
    return mp.nstr(v, 20, min_fixed=-30, max_fixed=30)


print("== airy table on [-10, 10], step 0.5 (x, ai, ai', bi, bi')")
for i in range(-20, 21):
    x = mp.mpf(i) / 2
    print(f"    ({fmt(x)}, {', '.join(fmt(v) for v in airy_all(x))}),")

print("== airy at large |x| (x, ai, ai', bi, bi')")
for x in [-150, -60, -25, -12.25, 12.25, 25, 60]:
    print(f"    ({x}, {', '.join(fmt(v) for v in airy_all(x))}),")

# free kernel, m = hbar = 1, |r - r'| = 1, T = 1
k = (1 / (2 * mp.pi * 1j)) ** mp.mpf(1.5) * mp.exp(0.5j)
print("k_free(d=1,T=1) =", fmt(k.real), fmt(k.imag))

# field kernel, m = hbar = F = 1, r' = 0, r = (0, 0, 1), T = 1
kf = k * mp.exp(1j * 1 * 1 * 1 / 2 - 1j / 24)
print("k_field(z=1,T=1) =", fmt(kf.real), fmt(kf.imag))


def g_field_closed(rho, z, zp, E, m, F):
    """Uniform-field Green function (hbar = 1), force along +z."""
    beta = (1 / (2 * m * F)) ** (mp.mpf(1) / 3)
    eps = F * beta
    d = mp.sqrt(rho**2 + (z - zp) ** 2) / beta
    Z = (z + zp) / 2 / beta
    e = E / eps
    up = -(e + Z + d / 2)
    um = -(e + Z - d / 2)
    ci = lambda u: mp.airybi(u) + 1j * mp.airyai(u)
    cip = lambda u: mp.airybi(u, derivative=1) + 1j * mp.airyai(u, derivative=1)
    val = (mp.airyai(um, derivative=1) * ci(up) - mp.airyai(um) * cip(up)) / (4 * d)
    return val / (eps * beta**3)


def g_field_quad(rho, z, zp, E, m, F, theta=mp.pi / 8):
    """Independent route: Laplace transform of the field kernel on a rotated ray."""
    d2 = rho**2 + (z - zp) ** 2
    rot = mp.exp(-1j * theta)

    def f(s):
        T = s * rot
        K = (m / (2 * mp.pi * 1j * T)) ** mp.mpf(1.5) * mp.exp(
            1j * m * d2 / (2 * T) + 1j * F * T * (z + zp) / 2 - 1j * F**2 * T**3 / (24 * m))
        return -1j * K * mp.exp(1j * E * T) * rot

    return mp.quad(f, [0, 0.25, 1, 2, 4, 8, 16, mp.inf])


for (rho, z, E, m, F) in [(0, 2, 1, 1, 1), (0, 5, 2, 0.5, 1), (0, 2, -1, 0.5, 1), (1.5, 3, 0.7, 0.5, 1)]:
    a = g_field_closed(mp.mpf(rho), mp.mpf(z), 0, mp.mpf(E), mp.mpf(m), mp.mpf(F))
    b = g_field_quad(mp.mpf(rho), mp.mpf(z), 0, mp.mpf(E), mp.mpf(m), mp.mpf(F))
    print(f"g_field(rho={rho}, z={z}, E={E}, m={m}, F={F}) closed = {fmt(a.real)} {fmt(a.imag)}"
          f"  quad = {fmt(b.real)} {fmt(b.imag)}  diff={mp.nstr(abs(a-b),3)}")

# physical scales: electron in F = 116 eV/m
hbar = mp.mpf('1.054571817e-34')
me = mp.mpf('9.1093837015e-31')
qe = mp.mpf('1.602176634e-19')
u = mp.mpf('1.66053906660e-27')
F = 116 * qe
beta = (hbar**2 / (2 * me * F)) ** (mp.mpf(1) / 3)
eps = F * beta
print("electron F=116 eV/m: beta =", fmt(beta), " eps =", fmt(eps),
      " E(60.8 ueV)/eps =", fmt(mp.mpf('60.8e-6') * qe / eps))
wc = qe * mp.mpf('0.001') / me
print("  hbar*wc(B=1mT)/eps =", fmt(hbar * wc / eps))
mrb = 87 * u
F = mrb * mp.mpf('9.81')
beta = (hbar**2 / (2 * mrb * F)) ** (mp.mpf(1) / 3)
eps = F * beta
print("Rb87: beta =", fmt(beta), " E(2.5kHz)/eps =", fmt(2 * mp.pi * hbar * 2500 / eps))


# Parallel E and B kernel via the classical action (Van Vleck form).
# m = hbar = q = B = F = 1, symmetric gauge A = (B/2)(-y, x, 0).
def classical_action(rf, ri, T, m=1, q=1, B=1, F=1):
    w = q * B / m
    # transverse: solve x'' = w y', y'' = -w x' by shooting (linear in v0)
    def endpoint(v):
        def rhs(t, s):
            return [s[2], s[3], w * s[3], -w * s[2]]
        sol = mp.odefun(rhs, 0, [ri[0], ri[1], v[0], v[1]])
        return sol(T)
    e0 = endpoint([0, 0])
    ex = endpoint([1, 0])
    ey = endpoint([0, 1])
    M = mp.matrix([[ex[0] - e0[0], ey[0] - e0[0]], [ex[1] - e0[1], ey[1] - e0[1]]])
    rhsv = mp.matrix([rf[0] - e0[0], rf[1] - e0[1]])
    v = mp.lu_solve(M, rhsv)
    vz = (rf[2] - ri[2]) / T - F * T / (2 * m)

    def rhs(t, s):
        return [s[2], s[3], w * s[3], -w * s[2]]
    sol = mp.odefun(rhs, 0, [ri[0], ri[1], v[0], v[1]])

    def lag(t):
        x, y, vx, vy = sol(t)
        z = ri[2] + vz * t + F * t**2 / (2 * m)
        vzt = vz + F * t / m
        ax, ay = -B * y / 2, B * x / 2
        return m * (vx**2 + vy**2 + vzt**2) / 2 + q * (vx * ax + vy * ay) + F * z
    return mp.quad(lag, [0, T])


mp.mp.dps = 30
rf = [mp.mpf(1), mp.mpf(0), mp.mpf(1)]
ri = [mp.mpf(0), mp.mpf(0), mp.mpf(0)]
T = mp.mpf(1)
S = classical_action(rf, ri, T)
h = mp.mpf('1e-6')
D = mp.matrix(3, 3)
for i in range(3):
    for j in range(3):
        def Sij(si, sj):
            a = list(rf); b = list(ri)
            a[i] += si * h; b[j] += sj * h
            return classical_action(a, b, T)
        D[i, j] = (Sij(1, 1) - Sij(1, -1) - Sij(-1, 1) + Sij(-1, -1)) / (4 * h * h)
det = mp.det(-D)
kl = (2 * mp.pi * 1j) ** mp.mpf(-1.5) * mp.sqrt(det) * mp.exp(1j * S)
print("k_landau_field(r=(1,0,1), T=1) action =", fmt(S), " det =", fmt(det),
      " K =", fmt(kl.real), fmt(kl.imag))

ri2 = [mp.mpf('0.3'), mp.mpf('0.4'), mp.mpf(0)]
S2 = classical_action(rf, ri2, T)
D2 = mp.matrix(3, 3)
for i in range(3):
    for j in range(3):
        def Sij(si, sj):
            a = list(rf); b = list(ri2)
            a[i] += si * h; b[j] += sj * h
            return classical_action(a, b, T)
        D2[i, j] = (Sij(1, 1) - Sij(1, -1) - Sij(-1, 1) + Sij(-1, -1)) / (4 * h * h)
kl2 = (2 * mp.pi * 1j) ** mp.mpf(-1.5) * mp.sqrt(mp.det(-D2)) * mp.exp(1j * S2)
print("k_landau_field(r=(1,0,1), r'=(0.3,0.4,0), T=1) =", fmt(kl2.real), fmt(kl2.imag))
