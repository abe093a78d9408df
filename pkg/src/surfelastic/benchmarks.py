"""Ready-made configurations of the four benchmark problems.

=============  ==============================================================
cook           tapered Cook panel, 10x10x1 cells, left face clamped, shear
               traction on the right face, every other face energetic; surface
               moduli proportional to the volume moduli (ratio mode)
nanowire       pentagonal prism (circumradius 1, length 5) stretched 40 % in
               z; side faces energetic with mu^ = 0
bridge         thin-walled tube (outer radius 2.5, wall 0.1, length 3),
               lambda = 0, mu = 10, ends clamped; the outer face carries a
               surface tension ramped to 100 in 20 steps
rough plate    8x8x1 cantilever with a random rough top face (energetic),
               left face clamped, downward traction on the bottom face
=============  ==============================================================

The bridge dimensions are chosen so that the catenoid spanned by two rings
of radius 2.5 at distance 3 has a midpoint deflection of 0.6373.
"""

from .io.config import (
    BoundaryConfig,
    DirichletSpec,
    MeshConfig,
    OutputConfig,
    RunConfig,
    SolverConfig,
    SurfaceConfig,
    TimeConfig,
    VolumeConfig,
)

__all__ = ["BENCHMARKS", "cook_config", "nanowire_config", "bridge_config", "rough_plate_config",
           "BRIDGE_TARGET", "catenoid_deflection"]

#: analytical midpoint deflection of the liquid bridge
BRIDGE_TARGET = 0.6373


def catenoid_deflection(radius=2.5, length=3.0):
    """Midpoint deflection ``R - a`` of the stable catenoid ``r = a cosh(z / a)``."""
    import numpy as np
    from scipy.optimize import brentq

    half = 0.5 * length
    g = lambda a: a * np.cosh(half / a) - radius  # noqa: E731
    # the stable branch is the larger root; the smaller sits below the turning point
    grid = np.linspace(half / 1.2, radius, 2000)
    a_turn = grid[np.argmin([g(a) for a in grid])]
    return radius - brentq(g, a_turn, radius)


def cook_config(ratio=0.5, refine=0, mu=1.0, traction=0.05, steps=10):
    k = 2**refine
    return RunConfig(
        mesh=MeshConfig(generator="cook", parameters={"nx": 10 * k, "ny": 10 * k, "nz": k, "thickness": 10.0}),
        volume=VolumeConfig(1.5 * mu, mu),
        surface=SurfaceConfig(ratio_mode=True, ratio=ratio),
        boundary=BoundaryConfig(
            energetic=(1, 2, 3, 4, 5),
            dirichlet=(DirichletSpec(0, "xyz", 0.0),),
            traction=((1, (0.0, traction, 0.0)),),
        ),
        time=TimeConfig(steps),
        output=OutputConfig(directory="output-cook", monitor=((48.0, 60.0, 5.0),)),
    )


def nanowire_config(ratio=1.0, divisions=4, length_divisions=20, steps=10):
    lam = 1.5
    return RunConfig(
        mesh=MeshConfig(
            generator="nanowire",
            parameters={"sides": 5, "radius": 1.0, "length": 5.0, "divisions": divisions,
                        "length_divisions": length_divisions},
        ),
        volume=VolumeConfig(lam, 1.0),
        surface=SurfaceConfig(lam=ratio * lam, mu=0.0),
        boundary=BoundaryConfig(
            energetic=(2, 3, 4, 5, 6),
            dirichlet=(DirichletSpec(0, "xyz", 0.0), DirichletSpec(1, "xy", 0.0), DirichletSpec(1, "z", 2.0)),
        ),
        time=TimeConfig(steps),
        output=OutputConfig(directory="output-nanowire", monitor=((0.0, 0.0, 2.5),)),
    )


def bridge_config(refine=0, n_theta=320, n_length=26, steps=20, gamma=100.0):
    k = 2**refine
    return RunConfig(
        mesh=MeshConfig(
            generator="shell cylinder",
            parameters={"radius": 2.5, "thickness": 0.1, "length": 3.0, "n_theta": n_theta * k,
                        "n_length": n_length * k, "n_wall": 1},
        ),
        volume=VolumeConfig(0.0, 10.0),
        surface=SurfaceConfig(gamma=gamma, ramp_surface_tension=True),
        boundary=BoundaryConfig(
            energetic=(1,),
            dirichlet=(DirichletSpec(2, "xyz", 0.0), DirichletSpec(3, "xyz", 0.0)),
        ),
        time=TimeConfig(steps),
        solver=SolverConfig(linear_solver="direct"),
        output=OutputConfig(directory="output-bridge", monitor=((2.5, 0.0, 1.5),)),
    )


def rough_plate_config(ratio=1.0, nx=40, nz=4, seed=0, steps=10):
    return RunConfig(
        mesh=MeshConfig(
            generator="rough plate",
            parameters={"divisions": 100, "length": 2.0, "rms": 0.05, "correlation_length": 0.25,
                        "seed": seed, "scaled_length": 8.0, "thickness": 1.0, "nx": nx, "ny": nx, "nz": nz},
        ),
        volume=VolumeConfig(4.5e7, 3.0e7),
        surface=SurfaceConfig(ratio_mode=True, ratio=ratio),
        boundary=BoundaryConfig(
            energetic=(5,),
            dirichlet=(DirichletSpec(0, "xyz", 0.0),),
            traction=((4, (0.0, 0.0, -1.0e4)),),
        ),
        time=TimeConfig(steps),
        output=OutputConfig(directory="output-rough-plate", monitor=((8.0, 4.0, 0.0),)),
    )


BENCHMARKS = {
    "cook": cook_config,
    "nanowire": nanowire_config,
    "bridge": bridge_config,
    "rough-plate": rough_plate_config,
}
