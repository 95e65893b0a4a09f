"""Independent high-precision evaluation of the constitutive functions.

Values printed here are frozen into tests/unit/test_arz.cpp. Units are the
reporting units (km/h, veh/km, veh/h); the C++ tests convert to SI.
"""
from mpmath import mp, mpf

mp.dps = 40

VF = mpf(100)      # km/h
RHO_M = mpf(250)   # veh/km
GAMMA = mpf("1.25")


def p(rho):
    return VF * (rho / RHO_M) ** GAMMA


def sigma(chi):
    return RHO_M * (chi / (VF * (1 + GAMMA))) ** (1 / GAMMA)


def demand_both(rho, chi):
    s = sigma(chi)
    free = rho * (chi - p(rho))
    cong = s * (chi - p(s))
    return (free if rho <= s else cong), free, cong, s


def supply_both(rho, chi_up):
    s = sigma(chi_up)
    free = s * (chi_up - p(s))
    cong = rho * (chi_up - p(rho))
    return (free if rho <= s else cong), free, cong, s


print("pressure(125) km/h      =", mp.nstr(p(mpf(125)), 25))
print("sigma(v_f) veh/km       =", mp.nstr(sigma(VF), 25))
rho, v = mpf(200), mpf(20)
chi = v + p(rho)
d, df, dc, s = demand_both(rho, chi)
print("demand(200, v=20) chi   =", mp.nstr(chi, 25), "sigma", mp.nstr(s, 25))
print("  free branch veh/h     =", mp.nstr(df, 25))
print("  cong branch veh/h     =", mp.nstr(dc, 25))
print("  selected veh/h        =", mp.nstr(d, 25))
for chi_up in (mpf(60), mpf(100)):
    sv, sf, sc, s = supply_both(mpf(220), chi_up)
    print(f"supply(220, chi_up={chi_up}) sigma", mp.nstr(s, 25))
    print("  free branch veh/h     =", mp.nstr(sf, 25))
    print("  cong branch veh/h     =", mp.nstr(sc, 25))
    print("  selected (clamped)    =", mp.nstr(max(sv, 0), 25))
