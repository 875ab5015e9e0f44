"""A charged particle on a sphere around a monopole.

Run:  python3 demos/monopole_on_sphere.py

The reduced phase space carries a twisted bracket; the flow crosses from the
chart around p = 0 to the chart around p = infinity and keeps the energy and
the three angular momenta fixed.  The total flux counts 2s units, which is
why the sphere only admits half-integer spin.
"""
from hamred import reduction as R
from hamred.core import Params, PhaseState, Space
from hamred.dynamics import IntegratorConfig, drift_report, flow, make_system

params = Params(m=1.0, s=0.5)
system = make_system("SphereMonopole", params)
traj = flow(system, PhaseState(Space.SPHERE_CHART0, (1.0 + 0j, -0.3 - 0.3j)), IntegratorConfig(dt=3e-4, t_end=0.3))

print(f"steps {len(traj) - 1}, charts visited {sorted(set(traj.charts.tolist()))}")
for name, e in drift_report(traj, (system.h,) + system.conserved).entries.items():
    print(f"  {name:3s} start {e['initial']: .6f}  drift {e['relative']:.1e}")

print(f"total flux {R.total_sphere_flux(params):.8f} (monopole value {R.monopole_flux(params.s):.8f})")
for s in (0.25, 0.5, 1.0):
    a, b = R.spin_quantization_check(s, "sphere"), R.spin_quantization_check(s, "pseudosphere")
    print(f"s = {s}: sphere {a.reason}; pseudosphere admits it, exchange phase {b.exchange_phase:.4f}")
