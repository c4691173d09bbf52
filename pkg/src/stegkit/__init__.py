"""stegkit: minimal-distortion image steganography toolkit."""

__version__ = "0.1.0"

from .errors import FormatError, InfeasibleError
from .io import (
    WET_COST,
    read_bits,
    read_cmap,
    read_mmap,
    read_pgm,
    read_pmap,
    write_bits,
    write_cmap,
    write_mmap,
    write_pgm,
    write_pmap,
)
from .rate_loss import (
    CapacityReport,
    EmbeddingConfig,
    LossConfig,
    capacity,
    discriminator_loss,
    generator_loss,
    split_probability,
    ternary_entropy,
)
from .simulator import (
    apply_modification,
    random_field,
    simulate_map,
    staircase_simulate,
    tanh_simulate,
    tanh_simulate_grad,
)
from .cost import calibrate_payload, cost_to_prob, prob_to_cost
from .srm import export_kernel_table, filter_bank, residuals, sca_residuals
from .stc import (
    StcParams,
    default_params,
    embed_image,
    extract_image,
    make_sub_matrix,
    scan_order,
    stc_embed,
    stc_extract,
)
from .estimators import (
    CostConverter,
    EmbeddingSimulator,
    PayloadCalibrator,
    SrmResiduals,
)
