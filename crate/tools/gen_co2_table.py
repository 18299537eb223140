"""Regenerate crates/core/data/co2_properties_v1.csv from CoolProp.

Grid: 5..40 MPa every 1 MPa, 20..150 C every 5 C.
"""
import CoolProp.CoolProp as CP

pressures = [p * 1e6 for p in range(5, 41)]
temps = [t for t in range(20, 151, 5)]

print("# co2 property table v1 (CoolProp %s, Span-Wagner EOS)" % CP.get_global_param_string("version"))
print("pressure_mpa,temperature_c,density_kg_m3,viscosity_pa_s")
for p in pressures:
    for t in temps:
        tk = t + 273.15
        rho = CP.PropsSI("D", "P", p, "T", tk, "CO2")
        mu = CP.PropsSI("V", "P", p, "T", tk, "CO2")
        print("%g,%g,%.4f,%.6e" % (p / 1e6, t, rho, mu))
