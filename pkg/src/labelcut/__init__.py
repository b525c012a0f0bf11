"""Workbench for the Min Label s-t Cut problem and its LP integrality gaps."""

from .core import (
    Instance,
    InstanceError,
    LabelSubset,
    ParseError,
    ResourceError,
    VersionError,
    emit,
    is_label_cut,
    parse,
    path_labels,
    roundtrip,
)
from .exact import (
    CutResult,
    label_cut_upper_bound_via_min_cut,
    min_label_cut_bnb,
    min_label_cut_exhaustive,
)
from .generators import (
    GadgetParams,
    PermutationTable,
    derive_params,
    make_chain,
    make_gap_instance,
    make_path_instance,
    make_shutter,
)
from .lp import (
    RelaxationResult,
    lp_solve_dense,
    separate_lp1,
    separate_lp2_gadget,
    separate_lp2_generic,
    solve_relaxation,
)

__version__ = "0.1.0"
