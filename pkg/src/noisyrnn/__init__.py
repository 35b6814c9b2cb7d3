"""Noisy sigmoid recurrent networks: TV covering bounds, sample complexity and
executable certification of the supporting inequalities."""

from .bounds import (
    composition_cover_bound,
    ell2_cover_radius_from_tv,
    multilayer_cover_bound,
    recurrent_cover_reduction,
    rnn_cover_bound,
    sample_complexity_lower,
    sample_complexity_upper,
    single_layer_cover_bound,
)
from .covers import (
    CoverResult,
    GridClassSpec,
    certify_recurrent_cover,
    empirical_cover_greedy,
    enumerate_grid_class,
)
from .estimators import GridERMClassifier, NoisyRecurrentClassifier
from .learning import (
    SampleSet,
    SGDParams,
    derandomized_predict,
    empirical_ramp_risk,
    erm_grid,
    pac_excess_risk_bound,
    ramp_loss,
    sgd_train,
    zero_one_loss,
)
from .networks import (
    MLPSpec,
    RecurrentConfig,
    margin_rescale_factor,
    mlp_forward,
    noisy_mlp_forward,
    recurrent_apply,
    recurrent_hypothesis,
    rescale_last_row,
)
from .numerics import RngStream, ramp, sigmoid_centered, sigmoid_centered_inverse
from .tv import (
    DistributionHandle,
    GaussianMixture,
    TVEstimate,
    coupling_disagreement,
    extended_metric,
    tv_gaussian_pair,
    tv_mixture_mc,
    tv_numeric_1d,
)

__version__ = "0.1.0"
