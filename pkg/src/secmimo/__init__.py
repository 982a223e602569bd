"""Data-aided secure massive MIMO downlink under an active eavesdropper.

The BS separates its own users from a pilot-attacking eavesdropper by power
level in the eigenspace of the whole uplink block, precodes inside that
subspace, and the library evaluates the resulting secrecy sum-rate by Monte
Carlo simulation and in closed form.  A matched-filter plus artificial-noise
baseline is included for comparison.
"""

from .asymptotics import AsymptoticReport, a1, a2, asymptotic_rate, gamma_bar
from .config import (ConfigError, OrderedPowerProfile, SystemConfig,
                     ValidatedConfig, load_config, order_powers, default_config,
                     validate_config)
from .downlink import (GainSamples, PrecoderSet, SecrecyReport, build_precoders,
                       compute_gains, estimate_eve_capacity, estimate_sinr,
                       secrecy_sum_rate)
from .estimator import (EigenBasis, SubspaceEstimate, despread_and_estimate,
                        eigendecompose_ascending, sample_gram,
                        select_desired_subspace, subspace_alignment)
from .harness import SweepSpec, run_point, run_sweep, run_trials
from .mfan import MfanConfig, conventional_estimate, mfan_precode_and_rate
from .signals import (ChannelSet, PilotMatrix, UplinkObservation,
                      assemble_uplink, build_attack, build_pilots,
                      sample_channels)

__version__ = "0.1.0"
