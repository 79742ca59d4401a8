"""Numerical laboratory for the nonextensive information-transfer game.

The package builds, in order of dependency:

* ``numerics``       -- adaptive IVP integration, adaptive quadrature,
  bracketed root finding, finite differencing.
* ``info_measures``  -- Shannon/Tsallis entropies, Fisher information and
  its nonextensive generalization, a Monte Carlo Cramer-Rao experiment.
* ``epi``            -- the extreme-physical-information variational
  problem: Euler-Lagrange equation, first integral, implicit general
  solution, the c=0 closed form and the (c, gamma0) regime map.
* ``linearize``      -- the nonlocal transformation chain that maps the
  log-derivative equation onto a linear constant-coefficient ODE.
* ``cosmo``          -- four cosmological reductions (truncated viscous,
  full causal, perfect fluid with cosmological constant, Bianchi I) and
  the information-to-time equivalence checks.
* ``cli``            -- scenario-driven command line front end emitting
  CSV, JSON manifests and matplotlib figures.
"""

__version__ = "0.1.0"
