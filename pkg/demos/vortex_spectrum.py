"""Bound states of a Coulomb centre threaded by a flux vortex.

Run:  python3 demos/vortex_spectrum.py

Angular numbers are shifted by sigma.  For sigma = 1/2 every level is at
least doubly degenerate, the fingerprint of half-integer spin.  The closed
form is checked against a finite-difference radial solver.
"""
from hamred.spectra import aharonov_bohm_shift, degeneracies, radial_oracle, vortex_levels

for sigma in (0.0, 0.5):
    lines = vortex_levels(sigma, 2, 2, max_principal=2)
    print(f"sigma = {sigma}")
    print("  Nr  m_sigma   formula      oracle")
    for l in lines:
        E = radial_oracle(sigma, l.m_sigma, l.Nr + 1)[l.Nr]
        print(f"  {l.Nr:2d}  {l.m_sigma:+5.1f}  {l.energy:10.6f}  {E:10.6f}")
    print(f"  degeneracies {degeneracies(lines)}")

for sigma in (0.0, 0.25, 0.5, 0.75, 1.0):
    ab = aharonov_bohm_shift(sigma)
    print(f"sigma {sigma:4.2f}: ground {ab.ground_energy:9.5f}, multiplet {ab.ground_multiplet}")
