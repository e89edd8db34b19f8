"""ASR engine interface, speaker attribution, result documents, SRT/JSON export."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable, Protocol

from .audio import AudioBuffer, TimeInterval
from .errors import IndexOutOfRange, RevisionConflict, SchemaViolation
from .identification import IdentityDecision, LabeledDiarization


@dataclass(frozen=True)
class AsrSegment:
    interval: TimeInterval
    text: str
    words: list[tuple[str, TimeInterval]] | None = None


class AsrEngine(Protocol):
    id: str
    languages: list[str]

    def transcribe(self, buf: AudioBuffer, speech: list[TimeInterval]) -> list[AsrSegment]: ...


@dataclass(frozen=True)
class AttributedSegment:
    interval: TimeInterval
    speaker_label: str
    text: str
    cluster: str | None = None
    decision: IdentityDecision | None = None


@dataclass(frozen=True)
class TranscriptDocument:
    media_id: str
    duration_s: float
    setup_id: str
    segments: list[AttributedSegment] = field(default_factory=list)
    revision: int = 0


class MockAsrEngine:
    """Deterministic stand-in engine: numbered tokens at a fixed word rate,
    or a timed sidecar reference transcript filtered to speech regions."""

    TOKENS_PER_S = 3.0

    def __init__(self, sidecar: list[dict] | None = None):
        self.id = "mock"
        self.languages = ["xx"]
        self.sidecar = sidecar

    def transcribe(self, buf: AudioBuffer, speech: list[TimeInterval]) -> list[AsrSegment]:
        return mock_transcribe(buf, speech, self.sidecar)


def mock_transcribe(
    buf: AudioBuffer,
    speech: list[TimeInterval],
    sidecar: list[dict] | None = None,
) -> list[AsrSegment]:
    """See MockAsrEngine. Sidecar entries: {start_s, end_s, text}."""
    if sidecar is not None:
        out = []
        for line in sidecar:
            iv = TimeInterval(float(line["start_s"]), float(line["end_s"]))
            if any(iv.overlap_s(sp) > 0 for sp in speech):
                out.append(AsrSegment(interval=iv, text=str(line["text"])))
        return sorted(out, key=lambda s: s.interval.start_s)

    out = []
    counter = 0
    for iv in speech:
        n = max(1, int(round(iv.duration_s * MockAsrEngine.TOKENS_PER_S)))
        step = iv.duration_s / n
        words = []
        for k in range(n):
            counter += 1
            w_iv = TimeInterval(iv.start_s + k * step, iv.start_s + (k + 1) * step)
            words.append((f"w{counter}", w_iv))
        out.append(AsrSegment(interval=iv, text=" ".join(w for w, _ in words), words=words))
    return out


_ASR_REGISTRY: dict[str, Callable[[], AsrEngine]] = {"mock": MockAsrEngine}


def register_asr_engine(engine_id: str, factory: Callable[[], AsrEngine]) -> None:
    _ASR_REGISTRY[engine_id] = factory


def get_asr_engine(engine_id: str) -> AsrEngine:
    if engine_id not in _ASR_REGISTRY:
        raise KeyError(f"unknown ASR engine {engine_id!r}")
    return _ASR_REGISTRY[engine_id]()


def _best_segment(iv: TimeInterval, labeled: LabeledDiarization):
    """Diarization segment with max overlap; nearest boundary on zero overlap."""
    best = None
    best_ov = -1.0
    for seg in labeled.segments:
        ov = iv.overlap_s(seg.interval)
        if ov > best_ov:  # strict: earlier segment wins ties
            best_ov = ov
            best = seg
    if best_ov > 0:
        return best
    # zero overlap: nearest by boundary distance, earlier wins ties
    def gap(seg):
        if seg.interval.end_s <= iv.start_s:
            return iv.start_s - seg.interval.end_s
        return seg.interval.start_s - iv.end_s

    return min(labeled.segments, key=gap)


def attribute(asr: list[AsrSegment], labeled: LabeledDiarization) -> list[AttributedSegment]:
    """Give every ASR segment the speaker with dominant temporal overlap,
    splitting at speaker boundaries when word timings are available."""
    out: list[AttributedSegment] = []
    for seg in asr:
        if not labeled.segments:
            out.append(AttributedSegment(interval=seg.interval, speaker_label="Speaker1", text=seg.text))
            continue
        if seg.words:
            groups: list[tuple[object, list[str], float, float]] = []
            for word, w_iv in seg.words:
                mid = TimeInterval(w_iv.start_s, w_iv.end_s)
                target = _best_segment(mid, labeled)
                if groups and groups[-1][0] is target:
                    groups[-1][1].append(word)
                    groups[-1] = (target, groups[-1][1], groups[-1][2], w_iv.end_s)
                else:
                    groups.append((target, [word], w_iv.start_s, w_iv.end_s))
            for target, words, start, end in groups:
                out.append(
                    AttributedSegment(
                        interval=TimeInterval(start, end),
                        speaker_label=target.label,
                        text=" ".join(words),
                        cluster=target.cluster,
                        decision=target.decision,
                    )
                )
        else:
            target = _best_segment(seg.interval, labeled)
            out.append(
                AttributedSegment(
                    interval=seg.interval,
                    speaker_label=target.label,
                    text=seg.text,
                    cluster=target.cluster,
                    decision=target.decision,
                )
            )
    return sorted(out, key=lambda s: s.interval.start_s)


def _srt_timestamp(t: float) -> str:
    ms = int(round(t * 1000.0))
    h, rem = divmod(ms, 3600_000)
    m, rem = divmod(rem, 60_000)
    s, ms = divmod(rem, 1000)
    return f"{h:02d}:{m:02d}:{s:02d},{ms:03d}"


def export_srt(doc: TranscriptDocument) -> str:
    """Numbered cues, HH:MM:SS,mmm timestamps, '[label] text' cue lines, LF."""
    cues = []
    for i, seg in enumerate(doc.segments, start=1):
        cues.append(
            f"{i}\n{_srt_timestamp(seg.interval.start_s)} --> {_srt_timestamp(seg.interval.end_s)}\n"
            f"[{seg.speaker_label}] {seg.text}\n"
        )
    return "\n".join(cues)


def _decision_to_json(dec: IdentityDecision | None):
    if dec is None:
        return None
    d = {"kind": dec.kind, "scores": dec.scores}
    if dec.speaker_id is not None:
        d["speaker_id"] = dec.speaker_id
    if dec.unknown_index is not None:
        d["unknown_index"] = dec.unknown_index
    return d


def _decision_from_json(d):
    if d is None:
        return None
    if not isinstance(d, dict) or "kind" not in d or "scores" not in d:
        raise SchemaViolation("decision must have kind and scores")
    return IdentityDecision(
        kind=d["kind"],
        scores={str(k): float(v) for k, v in d["scores"].items()},
        speaker_id=d.get("speaker_id"),
        score=max(d["scores"].values()) if d["kind"] == "known" and d["scores"] else None,
        unknown_index=d.get("unknown_index"),
    )


def doc_to_dict(doc: TranscriptDocument) -> dict:
    return {
        "media_id": doc.media_id,
        "duration_s": doc.duration_s,
        "setup_id": doc.setup_id,
        "revision": doc.revision,
        "segments": [
            {
                "start_s": seg.interval.start_s,
                "end_s": seg.interval.end_s,
                "speaker": seg.speaker_label,
                "text": seg.text,
                "cluster": seg.cluster,
                "decision": _decision_to_json(seg.decision),
            }
            for seg in doc.segments
        ],
    }


def export_json(doc: TranscriptDocument) -> str:
    return json.dumps(doc_to_dict(doc), indent=2, sort_keys=True)


def doc_from_dict(obj) -> TranscriptDocument:
    if not isinstance(obj, dict):
        raise SchemaViolation("document must be a JSON object")
    for key in ("media_id", "duration_s", "setup_id", "revision", "segments"):
        if key not in obj:
            raise SchemaViolation(f"missing key {key!r}")
    if not isinstance(obj["segments"], list):
        raise SchemaViolation("segments must be a list")
    segments = []
    for i, s in enumerate(obj["segments"]):
        if not isinstance(s, dict):
            raise SchemaViolation(f"segment {i} must be an object")
        for key in ("start_s", "end_s", "speaker", "text"):
            if key not in s:
                raise SchemaViolation(f"segment {i} missing key {key!r}")
        segments.append(
            AttributedSegment(
                interval=TimeInterval(float(s["start_s"]), float(s["end_s"])),
                speaker_label=str(s["speaker"]),
                text=str(s["text"]),
                cluster=s.get("cluster"),
                decision=_decision_from_json(s.get("decision")),
            )
        )
    return TranscriptDocument(
        media_id=str(obj["media_id"]),
        duration_s=float(obj["duration_s"]),
        setup_id=str(obj["setup_id"]),
        revision=int(obj["revision"]),
        segments=segments,
    )


def import_json(text: str) -> TranscriptDocument:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaViolation(f"invalid JSON: {e}") from e
    return doc_from_dict(obj)


def apply_edit(doc: TranscriptDocument, edit: dict) -> TranscriptDocument:
    """Replace a segment's text and/or label under optimistic concurrency."""
    idx = edit["segment_index"]
    expected = edit["expected_revision"]
    if expected != doc.revision:
        raise RevisionConflict(f"expected revision {expected}, document at {doc.revision}")
    if not (0 <= idx < len(doc.segments)):
        raise IndexOutOfRange(f"segment index {idx} out of range")
    seg = doc.segments[idx]
    if edit.get("new_text") is not None:
        seg = replace(seg, text=str(edit["new_text"]))
    if edit.get("new_label") is not None:
        seg = replace(seg, speaker_label=str(edit["new_label"]))
    segments = list(doc.segments)
    segments[idx] = seg
    return replace(doc, segments=segments, revision=doc.revision + 1)
