"""speakerkit: joint speaker diarization and identification with
speaker-attributed transcription."""

from .audio import AudioBuffer, FrameSpec, TimeInterval, decode_wav, encode_wav, log_mel, resample, slice_buffer
from .corpus import SyntheticCorpus, generate_corpus, write_corpus
from .diarization import DiarizationOutput, DiarizationParams, diarize
from .embedding import BaselineBackend, SpeakerEmbedding, cosine_score, get_backend, mean_embedding
from .identification import IdentificationParams, SpeakerSet, assign_labels, enroll, identify
from .metrics import compute_der, id_accuracy, parse_rttm, rtf, write_rttm
from .transcript import TranscriptDocument, apply_edit, attribute, export_json, export_srt, import_json
from .vad import VadParams, detect_speech, vad_from_diarization

__version__ = "0.1.0"
