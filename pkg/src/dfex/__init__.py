"""Discrete deep convolutional feature extraction with certified operator bounds."""

__version__ = "0.1.0"

from .cartoon import (
    CartoonSpec,
    DeformationField,
    SampledCartoon,
    deform,
    deformation_bound,
    deformation_error,
    grid_endpoint_instance,
    indicator_bound,
    lipschitz_part_bound,
    random_cartoon,
    random_deformation,
    sample_cartoon,
)
from .config import bank_from_dict, bank_to_dict, load_config, sequence_from_dict
from .errors import (
    ConfigError,
    DfexError,
    GridEndpointError,
    InadmissibleError,
    PreconditionError,
    ShapeError,
)
from .featio import read_features, write_features
from .filterbank import (
    Atom,
    FilterBank,
    WaveletLabel,
    bessel_bound,
    frame_bounds,
    normalize_for_admissibility,
    random_bank,
    tight_signal,
    verify_bessel_inequality,
)
from .network import (
    FeatureVector,
    Module,
    ModuleSequence,
    check_admissibility,
    count_paths,
    enumerate_paths,
    extract,
    feature_dimension,
    feature_space_norm,
    frequency_decreasing_paths,
    local_lipschitz,
    propagate_one,
    propagate_path,
)
from .ops import NonLinearity, PoolingOp, apply_nonlinearity, pool, verify_pool_lipschitz
from .signal import circ_conv, delta, dft, idft, norms, translate
from .signal_io import read_signal, write_signal
from .verify import (
    VerificationReport,
    check_deformation,
    check_global,
    check_local,
    check_translation_covariance,
    run_suites,
)
from .wavelets import wavelet_bank
