"""Exact spectra of the anisotropic two-photon and two-mode Rabi models.

The G-function pipeline (model -> recurrence -> gfunction -> spectrum) is
cross-checked by a truncated Fock-space oracle; ``observables`` adds
eigenstates, spin entanglement and near-critical scans.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, DomainError, FormulaMismatchError, InsufficientCutoffError,
                     NearSingularFError, NoSolutionError, NonConvergenceError, NotDegenerateError,
                     NumericError, OutOfDomainError, PoleProximityError, RabiError,
                     SingularAnisotropyError, ValidityError)
from .gfunction import (GSample, PoleSet, d_coefficient, g_curve, g_value, g_values, log_d_coefficient,
                        pole_energies)
from .model import (BogolubovFrame, ModelKind, ModelParams, RotatedCouplings, RotationFrames,
                    SectorLabel, bogolubov_frame, critical_coupling, rotated_couplings, two_mode,
                    two_photon)
from .observables import (ReducedSpinDensity, SpinBosonState, assemble_crossing_state,
                          condensation_scan, entanglement_entropy, entropy_sweep,
                          isotropic_reference_point, photon_number_distribution,
                          reduced_spin_density, supercritical_scan)
from .oracle import (EigenDecomposition, TruncatedHamiltonian, alpha_fock, bogolubov_conjugation_check,
                     build_hamiltonian, diagonalize, parity_matrix, two_mode_vacuum, vacuum_state_alpha)
from .recurrence import ChainCoefficients, CoefficientChain, build_chain, chain_coefficients
from .spectrum import (JuddianPoint, RootRecord, SweepResult, find_roots, juddian_analytic,
                       juddian_numeric, rwa_ground_estimate, sweep_spectrum)
