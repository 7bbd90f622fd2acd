"""Model, netlist generator, resource estimator and protocol simulator for a
sparse spin-qubit plane with locally integrated control electronics."""

__version__ = "0.1.0"
