"""Speaker-attributed transcripts: ASR alignment, SRT export, edits.

Runs the mock ASR (3 tokens/s) over detected speech, attributes words to
diarization clusters by temporal overlap, exports SRT and JSON, and applies
an optimistic-concurrency edit.
"""

from speakerkit import BaselineBackend, diarize, generate_corpus
from speakerkit.transcript import (
    TranscriptDocument,
    apply_edit,
    attribute,
    export_json,
    export_srt,
    mock_transcribe,
)
from speakerkit.identification import LabeledDiarization, LabeledSegment, IdentityDecision
from speakerkit.vad import vad_from_diarization

corpus = generate_corpus(voices=2, turns=3, seed=7)
out = diarize(corpus.buffer, BaselineBackend())

speech = vad_from_diarization(out)
asr = mock_transcribe(corpus.buffer, speech)

labeled = LabeledDiarization(segments=[
    LabeledSegment(interval=iv, label=lab, cluster=lab,
                   decision=IdentityDecision(kind="unknown", scores={}))
    for iv, lab in out.segments
])
segments = attribute(asr, labeled)

doc = TranscriptDocument(media_id="demo", duration_s=corpus.buffer.duration_s,
                         setup_id="speech-analytics", segments=segments)

print(export_srt(doc))

edited = apply_edit(doc, {"segment_index": 0,
                          "new_text": "hand-corrected opening line",
                          "expected_revision": 0})
print(f"revision {doc.revision} -> {edited.revision}; "
      f"segment 0 now: {edited.segments[0].text!r}\n")

print(export_json(edited)[:400] + " ...")
