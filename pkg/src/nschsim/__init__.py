"""Simulator and verification harness for a viscous Cahn-Hilliard system with
a singular potential and a nonnegative chemical potential.

    (eps + 2 rho) d_t mu + mu d_t rho - lap mu = 0
    delta d_t rho - lap rho + f'(rho) = mu

on a rectangle with zero-flux boundary conditions.
"""
from .grid import Grid
from .potential import PotentialSpec, eval_potential, yosida_f1_prime, yosida_resolvent
from .stepper import SolverConfig, State, Trajectory, advance, simulate

__version__ = "0.1.0"

__all__ = [
    "Grid", "PotentialSpec", "SolverConfig", "State", "Trajectory",
    "advance", "eval_potential", "simulate", "yosida_f1_prime", "yosida_resolvent",
]
