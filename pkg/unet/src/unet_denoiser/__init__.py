"""Encoder-decoder spectrogram denoiser speaking the SPEC1 subprocess protocol."""

from .data import Pair, PairDataError, load_pair_manifest, pairs_from_aug_dir
from .infer import infer
from .model import DenoiserUNet, denoise_matrix
from .spec1 import read_spec1, write_spec1
from .train import TrainConfig, baseline_l1, load_model, train

__version__ = "0.1.0"
