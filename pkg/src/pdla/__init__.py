"""Deviant-learning sequence memory for pipeline threat classification."""
from .classifier import MapcaReport, assign_label, mapca
from .dataset_io import (
    ArityMismatch, DatasetError, EmptyDataset, Exemplar, ExemplarSet, NonNumericCell,
    bundled_threat_sample, load_csv, save_csv, synth_incident_set,
)
from .dla_core import (
    DlaConfig, MemorizedChunk, MemoryStore, NoMemory, Prediction, deviant_average, extrapolate,
    mismatch, replay, run_episode,
)
from .representation import EncoderConfig, IntegerChunk, SksPolicy, apply_sks, decode, encode

__version__ = "0.1.0"
