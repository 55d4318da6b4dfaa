"""Hyperbolic-geometry toolkit for boundary conformality of holomorphic self-maps.

Subpackages cover the Poincare metric and Mobius gadgets (``geometry``),
an expression DSL with dual-number derivatives and a map catalog (``maps``),
approach paths (``paths``), hyperbolic distortion and integral tests
(``distortion``), de Branges-Rovnyak kernels (``kernel``), boundary condition
batteries and classification (``boundary``), iteration and pre-models
(``dynamics``), and a CLI (``cli``).
"""

__version__ = "0.1.0"
