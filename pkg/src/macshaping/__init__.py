"""Input-distribution shaping for the two-user Gaussian MAC with XOR computation."""

__version__ = "0.1.0"

from .constellation import (Constellation, InvalidArgument, XorClassIndex,  # noqa: E402
                            build_xor_classes, check_ambiguity_free, get_constellation,
                            make_pam, make_qam16_gray)
from .channel import ChannelSpec, QuadratureGrid, build_grid, likelihood  # noqa: E402
from .info import (InputDistribution, MIResult, UnreachableRateError,  # noqa: E402
                   class_prior, cutset_bound, entropy_grad, entropy_hess, entropy_wc,
                   mb_distribution, mb_lambda_search, mutual_information,
                   mutual_information_mc, rate_at_snr)
from .optimizer import (OptimizationFailed, ShapingProblem, ShapingResult,  # noqa: E402
                        optimize, snr_threshold, sweep)
