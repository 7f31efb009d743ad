"""heatbounds: exact heat-semigroup gradient bounds on model manifolds,
with the stochastic machinery to falsify them at desk scale.

Layout: ``geometry`` (model catalogue and exact curvature packs),
``bounds`` (every closed-form estimate as a pure function), ``simulate``
(diffusion paths, damped transport, probabilistic gradients), ``spectral``
(band projections and scaling scans), ``oracles`` (closed-form ground
truth), ``verify`` (the experiment registry), ``cli`` (front end).
"""

from . import bounds, geometry, oracles, simulate, spectral, verify  # noqa: F401

__version__ = "0.1.0"
