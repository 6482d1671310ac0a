"""Bennett-type deviation inequalities and generalization bounds, with numeric
inversion, Monte Carlo validation and convergence-rate diagnostics."""

__version__ = "0.1.0"
