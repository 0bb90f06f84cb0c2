"""Trainable belief-propagation decoding and learned digital backpropagation."""

from . import channel, cli, codes, grad, ldbp, train, wbp
from .codes import (
    BinaryMatrix,
    Permutation,
    TannerGraph,
    bch_generator_matrix,
    bch_parity_check,
    build_tanner,
    count_4cycles,
    read_alist,
    reduce_cycles,
    sample_automorphism,
    write_alist,
)
from .channel import ChannelFrame, channel_llr, transmit
from .wbp import MessageState, RrdConfig, WeightSet, decode, rrd_decode
from .train import TrainConfig, train_decoder
from .grad import finite_diff_check
from .ldbp import (
    ComplexSignal,
    FiberParams,
    FilterBank,
    LinkConfig,
    dbp_frequency_domain,
    design_fir,
    effective_snr,
    generate_waveform,
    ldbp_apply,
    ssfm_propagate,
    train_ldbp,
)

__version__ = "0.1.0"
