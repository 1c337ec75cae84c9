"""Information-theoretic evaluation of sound-to-spike encoding.

The package synthesizes frequency- and amplitude-modulated test sounds
driven by a hidden random level track, extracts gammatone cochleagrams,
encodes them into spike trains with four encoders (independent stochastic
spiking, send-on-delta, Ben's spiker algorithm, leaky integrate-and-fire),
and scores every encoding by bias-corrected time-delayed mutual information
between the track and the spike words, normalized by the track entropy.
"""

from .cochleagram import (
    Cochleagram,
    FilterBankSpec,
    design_filterbank,
    extract_cochleagram,
    gammatone_response,
    inner_hair_cell,
)
from .encoders import (
    BsaConfig,
    IscConfig,
    LifConfig,
    SodConfig,
    SpikeMatrix,
    design_bsa_filter,
    encode_bsa,
    encode_channelwise,
    encode_isc,
    encode_lif,
    encode_sod,
)
from .erb import erb_bandwidth, erb_number, erb_number_to_hz, erbspace
from .errors import (
    DataError,
    DegenerateInputError,
    ParameterError,
    SpikeCodingError,
)
from .harness import (
    SweepResult,
    SweepSpec,
    TaskSpec,
    build_stimulus,
    reproduce_task,
    run_sweep,
    run_task_point,
)
from .infotheory import (
    EvalResult,
    MiCurve,
    SymbolSequence,
    build_history_words,
    build_population_words,
    coding_efficiency,
    coding_power,
    delay_sweep,
    entropy,
    evaluate_coding,
    plugin_mutual_information,
    quadratic_extrapolation,
    quantize_characteristic,
    shuffle_control,
    spike_density,
)
from .rng import derive_seed, rng_for
from .stimulus import (
    LevelTrack,
    Waveform,
    generate_level_track,
    map_to_erb_frequency,
    map_to_log_amplitude,
    synthesize_am,
    synthesize_fm,
)

__version__ = "0.1.0"
