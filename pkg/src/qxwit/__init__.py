"""Construction and numerical certification of a two-parameter family of
three-qubit entanglement witnesses built from positive bilinear maps.

The toolkit assembles the witness Choi matrices, enumerates the product
vectors annihilated by the witness and the rank-four separable states on its
dual face, and certifies numerically that the witness quadratic form is
nonnegative on product states, that the annihilated vectors span the whole
space under every partial conjugation, that the witness ray is exposed, and
that the witness detects entangled states with positive partial transposes.
"""

from .qcore import (
    HERMITICITY_TOL,
    PSD_TOL,
    PARTIES,
    SUBSETS,
    ProductVector,
    check_hermitian,
    herm_min_eig,
    hermiticity_defect,
    is_psd,
    kron,
    matrix_from_json,
    matrix_to_json,
    partial_conjugate,
    partial_transpose,
    product_vector_from_json,
    product_vector_to_json,
    subset_mask,
    tensor3,
)
from .xstate import (
    Reconstruction,
    SeparabilityVerdict,
    XMatrix,
    XNormBound,
    is_block_positive_xwitness,
    is_ghz_diagonal,
    rank4_separability_check,
    reconstruct_product_vector,
    x_norm,
    x_norm_lower_bound_check,
    xpart,
    xpart_decompose,
)
from .witness import (
    ETA_TAGS,
    FAMILY_TAGS,
    OMEGA,
    PV1_TAGS,
    ZETA_TAGS,
    KernelGrid,
    MotivatingSum,
    SeesawResult,
    WitnessFamily,
    choi_explicit,
    choi_generic,
    dual_state,
    kernel_vector,
    kernel_vectors,
    min_product_value,
    motivating_linear_map,
    motivating_sum,
    pairing,
    pairing_x,
    phi_apply,
    pv4_vectors,
    seesaw_minima,
    verify_positive,
)
from .certify import (
    ClassifyResult,
    DetectionCertificate,
    DualFaceSpan,
    ExposednessCertificate,
    PPTReport,
    SpanningReport,
    dual_face_span,
    exposedness_certificate,
    find_ppt_entangled,
    kernel_classify,
    ppt_check,
    separable_anchor,
    spanning_check,
)

__version__ = "0.1.0"

__all__ = [
    "HERMITICITY_TOL",
    "PSD_TOL",
    "PARTIES",
    "SUBSETS",
    "ProductVector",
    "check_hermitian",
    "herm_min_eig",
    "hermiticity_defect",
    "is_psd",
    "kron",
    "matrix_from_json",
    "matrix_to_json",
    "partial_conjugate",
    "partial_transpose",
    "product_vector_from_json",
    "product_vector_to_json",
    "subset_mask",
    "tensor3",
    "Reconstruction",
    "SeparabilityVerdict",
    "XMatrix",
    "XNormBound",
    "is_block_positive_xwitness",
    "is_ghz_diagonal",
    "rank4_separability_check",
    "reconstruct_product_vector",
    "x_norm",
    "x_norm_lower_bound_check",
    "xpart",
    "xpart_decompose",
    "ETA_TAGS",
    "FAMILY_TAGS",
    "OMEGA",
    "PV1_TAGS",
    "ZETA_TAGS",
    "KernelGrid",
    "MotivatingSum",
    "SeesawResult",
    "WitnessFamily",
    "choi_explicit",
    "choi_generic",
    "dual_state",
    "kernel_vector",
    "kernel_vectors",
    "min_product_value",
    "motivating_linear_map",
    "motivating_sum",
    "pairing",
    "pairing_x",
    "phi_apply",
    "pv4_vectors",
    "seesaw_minima",
    "verify_positive",
    "ClassifyResult",
    "DetectionCertificate",
    "DualFaceSpan",
    "ExposednessCertificate",
    "PPTReport",
    "SpanningReport",
    "dual_face_span",
    "exposedness_certificate",
    "find_ppt_entangled",
    "kernel_classify",
    "ppt_check",
    "separable_anchor",
    "spanning_check",
]
