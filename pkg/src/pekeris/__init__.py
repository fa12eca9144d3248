"""Ground states of two-electron atoms from an automatically derived Laguerre recurrence."""

__version__ = "0.1.0"

from .assembly import Basis, SparsePencil, assemble_pencil, enumerate_basis, fold
from .charpoly import CharPoly, charpoly_exact, cross_check_roots, det_mod_prime
from .diffop import DiffOp, apply_to_poly, change_vars_linear, clear, gauge_conjugate
from .exact import MultiPoly
from .pipeline import PipelineConfig, euler_check, hylleraas_operator, perimetric_operator
from .spectral import EigenResult, evaluate_wavefunction, find_largest_root, ground_state, log_det_sign
from .transfer import Recurrence, SeqOp, laguerre_eval, pekeris_recurrence, phi_transfer

__all__ = [
    "Basis", "CharPoly", "DiffOp", "EigenResult", "MultiPoly", "PipelineConfig", "Recurrence",
    "SeqOp", "SparsePencil", "apply_to_poly", "assemble_pencil", "change_vars_linear",
    "charpoly_exact", "clear", "cross_check_roots", "det_mod_prime", "enumerate_basis",
    "euler_check", "evaluate_wavefunction", "find_largest_root", "fold", "gauge_conjugate",
    "ground_state", "hylleraas_operator", "laguerre_eval", "log_det_sign",
    "pekeris_recurrence", "perimetric_operator", "phi_transfer",
]
