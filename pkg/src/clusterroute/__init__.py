"""Bell-pair routing on cluster states.

Modules
-------
graphstate
    Graph-state simulator with vertex operators and Pauli measurement rules.
oracle
    Dense statevector simulator used as the reference backend.
lattice
    Hardware lattices and their cluster-state preparation schedules.
routing
    Cut, zipper, 3D and two-round sequential Bell-pair routing.
protocols
    Remote gates, GHZ states, multi-qubit rotations and Clifford teleportation.
noise
    Monte Carlo Pauli-noise fidelity estimates.
cli
    Command-line front end.
"""

__version__ = "0.1.0"
