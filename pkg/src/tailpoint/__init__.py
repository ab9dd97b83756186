"""Delimiting points between the bulk and the tails of unimodal distributions."""
from .delimit import (
    DelimitingReport,
    Method,
    Side,
    closed_form_points,
    curvature,
    pinf,
    pmconv,
    pmcurv,
    report,
)
from .dist import (
    DensityBundle,
    DistributionSpec,
    cauchy,
    exponential,
    gaussian,
    kurtosis,
    lognormal,
    make_bundle,
    parse_spec,
    sample,
    skewt,
    studentt,
)
from .kde import (
    KdeModel,
    amise_bandwidth,
    eval_deriv,
    gaussian_kernel_roughness,
    hermite,
    sample_delimiting_points,
    true_roughness,
)

__version__ = "0.1.0"
