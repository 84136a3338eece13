"""Stability of linearized near-field phase contrast imaging.

Forward models (Fresnel propagation, contrast transfer functions), spectral
estimation of stability constants, closed-form analytic bounds and
regularized reconstruction, plus a CLI harness for reproducible sweeps.
"""

__version__ = "0.1.0"

from .fields import (
    FREQUENCY_SPACE,
    REAL_SPACE,
    GridSpec,
    SampledField,
    SupportSpec,
    apply_support,
    inner,
    make_grid,
    norm,
    real_inner,
    unitary_ft,
    unitary_ift,
)
from .fresnel import FresnelNumber, propagate, propagate_chirp
from .ctf import (
    CtfSpec,
    TwoDistanceSpec,
    ctf_forward,
    ctf_multiplier,
    homogeneous_forward,
    linear_adjoint,
    linear_forward,
    nonlinear_intensity,
    two_distance_forward,
)
from .spectral import (
    EigenReport,
    ProlateEigenSystem,
    gram_apply,
    gram_lambda_max,
    least_stable_mode,
    modal_constants,
    prolate_eigs,
    smallest_singular_value,
    stability_constant,
)
from .bounds import (
    BoundReport,
    FourierSplit,
    empirical_ip2_check,
    fourier_split,
    ip1_bound,
    ip2_bound,
    ip2_constants,
    ip3_bound,
    optimality_check,
    prolate_asymptotic,
    uncertainty_check,
)
from .recon import (
    ReconConfig,
    gabor_backprop,
    invert_ctf_single,
    invert_two_distance,
    masked_spectral_error,
    recon_metrics,
    twin_free_data,
)
from .phantoms import PhantomSpec, add_noise, make_phantom
from .fieldio import read_csv, read_field, write_csv, write_field
