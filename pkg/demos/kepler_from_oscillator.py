"""Kepler orbits as images of oscillator orbits.

Run:  python3 demos/kepler_from_oscillator.py [out_dir]

An oscillator ellipse centred at the origin is squared into a Kepler ellipse
with a focus at the origin.  One oscillator round covers the Kepler ellipse
twice, and the coupling of the image equals the oscillator energy.
"""
import math
import sys
from pathlib import Path

import numpy as np

from hamred.core import PhaseState, Space
from hamred.dynamics import oscillator_exact
from hamred.poisson import coulomb_observables
from hamred.svg import emit_svg
from hamred.transforms import ellipse_geometry, kepler_image, winding_number

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")

t = np.linspace(0, 2 * math.pi, 400, endpoint=False)
osc = oscillator_exact(PhaseState(Space.FLAT_C, (1.5 + 0j, -1j * math.sqrt(0.75))), t)
kep = kepler_image(osc)

H = coulomb_observables(kep.params)["H_C"]
energies = np.array([H(x) for x in kep.real_vectors()])
geo = ellipse_geometry(kep.position)

print(f"oscillator energy      {3.0:.6f}")
print(f"image coupling alpha   {kep.params.alpha:.6f}")
print(f"image energy H_C       {energies.mean():.12f} (spread {np.ptp(energies):.1e})")
print(f"winding about w = 0    {winding_number(np.append(kep.position, kep.position[0]))}")
print(f"ellipse centre         {geo.center:.6f}, focal distance {geo.focal_distance:.6f}")

svg = out / "kepler_from_oscillator.svg"
svg.write_text(emit_svg([osc, kep], markers=[(0j, "origin")]))
print(f"wrote {svg}")
