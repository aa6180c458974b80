"""diraclab: a numerical laboratory for the fermionic signature operator.

The package constructs, for the Dirac equation with a time-dependent
external potential, the interacting time evolution, the fermionic
signature operator per momentum block, its spectral splitting and the
fermionic projector, and the quasi-free state algebra on a finite mode
truncation, together with quantitative diagnostics (mass-oscillation
decay, spectral gap, contour projectors, momentum-decay Hadamard proxy).

Conventions used throughout (fixed package-wide; see module docs):
natural units, metric (+,-,...,-), spin scalar product ≺ψ|φ≻ = ψ†γ⁰φ,
per-mode Cauchy scalar product (ψ|φ) = ψ(t)†φ(t), per-mode space-time
inner product ⟨ψ|φ⟩ = (1/2π)∫dt ψ(t)†γ⁰φ(t).
"""

from .spinor import (SpinorRep, MomentumMode, build_dirac_representation,
                     frequency_projectors, vacuum_signature, vacuum_evolution,
                     vacuum_hamiltonian, mass_derivative_operators,
                     second_order_decomposition)
from .potentials import (PotentialSpec, evaluate, decay_norms,
                         check_smallness, symmetry_audit, SMALLNESS_THRESHOLD)
from .evolution import (EvolutionConfig, BlockPropagator, IntegrationError,
                        hamiltonian_block, evolve_block,
                        build_block_propagator, build_grid_propagators,
                        lippmann_schwinger, commutator_identity_check,
                        lattice_evolve, lattice_momenta, lattice_fourier_blocks)

__version__ = "0.1.0"
