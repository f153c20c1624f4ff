"""Detection of electric and hybrid vehicles from their ultrasonic emissions.

Modules
-------
audio_io    WAV I/O and the ``AudioClip`` container
spectral    STFT spectrograms, Welch PSDs, band power
filterbank  linear-phase FIR bandpass design and filtering
detector    segment-power threshold / vote / merge detector
synth       synthetic drive-by scenes
report      band summaries of PSDs
kernels     numba / numpy inner loops
"""

__version__ = "0.1.0"

from .audio_io import AudioClip, read_wav, slice_clip, write_wav
from .detector import DetectionEvent, DetectorConfig, detect_events, run_detector, segment_power, threshold_decisions
from .filterbank import FirFilter, apply_filter, design_bandpass, frequency_response
from .report import BandSummary, compare_profiles, summarize_bands
from .spectral import PowerSpectralDensity, Spectrogram, WindowSpec, band_power, make_window, stft_spectrogram, welch_psd
from .synth import (
    CircleScenario,
    EmissionProfile,
    PassByScenario,
    StaticScenario,
    background_noise,
    builtin_profiles,
    calibrate_source_amplitude,
    get_profile,
    render_scene,
)

__all__ = [
    "AudioClip",
    "read_wav",
    "write_wav",
    "slice_clip",
    "WindowSpec",
    "make_window",
    "Spectrogram",
    "PowerSpectralDensity",
    "stft_spectrogram",
    "welch_psd",
    "band_power",
    "FirFilter",
    "design_bandpass",
    "apply_filter",
    "frequency_response",
    "DetectorConfig",
    "DetectionEvent",
    "segment_power",
    "threshold_decisions",
    "detect_events",
    "run_detector",
    "EmissionProfile",
    "CircleScenario",
    "PassByScenario",
    "StaticScenario",
    "builtin_profiles",
    "background_noise",
    "render_scene",
    "get_profile",
    "calibrate_source_amplitude",
    "BandSummary",
    "summarize_bands",
    "compare_profiles",
]
