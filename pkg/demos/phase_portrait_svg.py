"""
Phase portraits to SVG
======================

Render a few interior trajectories per matrix into a standalone SVG:
the simplex is projected to the plane, the equilibrium segment K is
drawn as a chord, and each trajectory traces its closed loop around it.
Output lands next to this script.
"""

import pathlib

import numpy as np

from replicator4 import (canonical_matrix, integrate, interior_starts,
                         kernel_line_section, render_portrait)

here = pathlib.Path(__file__).resolve().parent

for name in ("I", "IV"):
    M = canonical_matrix(name)
    section = kernel_line_section(M)
    rng = np.random.default_rng(2)

    trajs = []
    for x0 in interior_starts(section, rng, 3):
        traj = integrate(M, x0, 30.0, rtol=1e-8)
        _, xs = traj.sample(0.05)
        label = "x0=(" + ", ".join(f"{v:.3f}" for v in x0) + ")"
        trajs.append((label, xs))

    svg = render_portrait(trajs, section=section)
    out = here / f"portrait_{name}.svg"
    out.write_text(svg, encoding="utf-8")
    print(f"class {name}: wrote {out} ({len(svg)} bytes, "
          f"{len(trajs)} trajectories)")
