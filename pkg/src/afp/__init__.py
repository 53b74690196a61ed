"""Noise-robust peak-based audio fingerprinting toolkit.

Core flow: degrade audio realistically (augment), fingerprint spectral-peak
constellations into a searchable index (fingerprint), optionally denoise the
query spectrogram first (denoise), and measure the effect (metrics, bench).
"""

from .augment import (
    AugmentConfig,
    AugmentRecord,
    Bank,
    BankEntry,
    apply_gain,
    augment_one,
    clip_fraction,
    derive_item_seed,
    mix_at_snr,
    replay_record,
)
from .denoise import (
    DenoiserKind,
    denoise_spectrogram,
    denoised_match,
    estimate_noise,
    mix_query,
    run_external,
    spectral_subtract,
)
from .dsp import (
    Spectrogram,
    StftConfig,
    Waveform,
    convolve,
    first_order_highpass,
    first_order_lowpass,
    resample,
    rms,
    stft,
    to_db,
)
from .errors import CorruptIndexError, ExternalDenoiserError
from .fingerprint import (
    FingerprintIndex,
    Landmark,
    MatchResult,
    build_index,
    load_index,
    match_landmarks,
    match_query,
    match_spectrogram,
    pack_hash,
    pair_landmarks,
    save_index,
    unpack_hash,
)
from .metrics import PeakMatchReport, identification_rate, l1_distance, peak_prf, psnr
from .bench import BenchConfig, load_query_manifest, run_benchmark
from .peaks import Peak, extract_peaks
from .spec1 import read_spec1, write_spec1
from .wav import read_wav, write_wav

__version__ = "0.1.0"
