"""Evaluation: RTTM I/O, diarization error rate, identification accuracy, RTF."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

from .errors import MixedFileIds, ParseError


@dataclass(frozen=True)
class RttmRecord:
    file_id: str
    onset_s: float
    duration_s: float
    speaker_name: str

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValueError("duration_s must be > 0")

    @property
    def end_s(self) -> float:
        return self.onset_s + self.duration_s


@dataclass(frozen=True)
class DerBreakdown:
    missed_s: float
    false_alarm_s: float
    confusion_s: float
    scored_speech_s: float
    collar_s: float

    @property
    def der(self) -> float:
        if self.scored_speech_s == 0:
            return 0.0
        return (self.missed_s + self.false_alarm_s + self.confusion_s) / self.scored_speech_s


def parse_rttm(text: str) -> list[RttmRecord]:
    records = []
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith(";;"):
            continue
        parts = line.split()
        if parts[0] != "SPEAKER":
            warnings.warn(f"line {ln}: skipping non-SPEAKER record type {parts[0]!r}")
            continue
        if len(parts) < 8:
            raise ParseError(f"line {ln}: expected >= 8 fields, got {len(parts)}", line_no=ln)
        try:
            onset = float(parts[3])
            dur = float(parts[4])
        except ValueError as e:
            raise ParseError(f"line {ln}: bad numeric field: {e}", line_no=ln) from e
        records.append(RttmRecord(file_id=parts[1], onset_s=onset, duration_s=dur, speaker_name=parts[7]))
    return records


def write_rttm(records: list[RttmRecord]) -> str:
    lines = [
        f"SPEAKER {r.file_id} 1 {r.onset_s:.3f} {r.duration_s:.3f} <NA> <NA> {r.speaker_name} <NA> <NA>"
        for r in records
    ]
    return "".join(line + "\n" for line in lines)


def _speaker_sets_at(records: list[RttmRecord], t0: float, t1: float) -> set[str]:
    mid = (t0 + t1) / 2.0
    return {r.speaker_name for r in records if r.onset_s < mid < r.end_s}


def _regions(ref, hyp, collar_s):
    """Scoring regions between consecutive boundary events, collar zones excised."""
    events = set()
    for r in ref + hyp:
        events.add(r.onset_s)
        events.add(r.end_s)
    if collar_s > 0:
        for r in ref:
            events.update((r.onset_s - collar_s, r.onset_s + collar_s, r.end_s - collar_s, r.end_s + collar_s))
    events.add(0.0)
    pts = sorted(p for p in events if p >= 0)

    excluded = []
    if collar_s > 0:
        for r in ref:
            excluded.append((r.onset_s - collar_s, r.onset_s + collar_s))
            excluded.append((r.end_s - collar_s, r.end_s + collar_s))

    out = []
    for t0, t1 in zip(pts, pts[1:]):
        if t1 - t0 <= 1e-12:
            continue
        mid = (t0 + t1) / 2.0
        if any(a < mid < b for a, b in excluded):
            continue
        out.append((t0, t1))
    return out


def _overlap_matrix(ref, hyp, regions):
    """Matched time per (ref speaker, hyp speaker) over scoring regions."""
    ref_names = sorted({r.speaker_name for r in ref})
    hyp_names = sorted({r.speaker_name for r in hyp})
    mat = {(a, b): 0.0 for a in ref_names for b in hyp_names}
    for t0, t1 in regions:
        rs = _speaker_sets_at(ref, t0, t1)
        hs = _speaker_sets_at(hyp, t0, t1)
        for a in rs:
            for b in hs:
                mat[(a, b)] += t1 - t0
    return ref_names, hyp_names, mat


def _map_exhaustive(ref_names, hyp_names, mat):
    small, large, flip = (ref_names, hyp_names, False) if len(ref_names) <= len(hyp_names) else (hyp_names, ref_names, True)
    best_map: dict[str, str] = {}
    best_total = -1.0
    for perm in itertools.permutations(large, len(small)):
        total = 0.0
        for s, l in zip(small, perm):
            total += mat[(l, s)] if flip else mat[(s, l)]
        if total > best_total:
            best_total = total
            best_map = {l: s for s, l in zip(small, perm)} if flip else dict(zip(small, perm))
    # best_map: ref speaker -> hyp speaker
    return best_map


def _map_greedy(ref_names, hyp_names, mat):
    pairs = sorted(mat.items(), key=lambda kv: (-kv[1], kv[0]))
    used_ref, used_hyp = set(), set()
    mapping = {}
    for (a, b), v in pairs:
        if v <= 0 or a in used_ref or b in used_hyp:
            continue
        mapping[a] = b
        used_ref.add(a)
        used_hyp.add(b)
    return mapping


def compute_der(ref: list[RttmRecord], hyp: list[RttmRecord], collar_s: float = 0.25) -> DerBreakdown:
    """Exact event-boundary DER with optimal ref-to-hyp speaker mapping.

    Exhaustive mapping when the smaller side has <= 8 speakers, greedy above.
    """
    file_ids = {r.file_id for r in ref} | {r.file_id for r in hyp}
    if len(file_ids) > 1:
        raise MixedFileIds(f"records span files {sorted(file_ids)}")

    regions = _regions(ref, hyp, collar_s)
    ref_names, hyp_names, mat = _overlap_matrix(ref, hyp, regions)
    if min(len(ref_names), len(hyp_names)) <= 8:
        mapping = _map_exhaustive(ref_names, hyp_names, mat)
    else:
        mapping = _map_greedy(ref_names, hyp_names, mat)

    missed = fa = confusion = scored = 0.0
    for t0, t1 in regions:
        dt = t1 - t0
        rs = _speaker_sets_at(ref, t0, t1)
        hs = _speaker_sets_at(hyp, t0, t1)
        n_ref, n_hyp = len(rs), len(hs)
        scored += n_ref * dt
        matched = sum(1 for a in rs if mapping.get(a) in hs)
        missed += max(0, n_ref - n_hyp) * dt
        fa += max(0, n_hyp - n_ref) * dt
        confusion += (min(n_ref, n_hyp) - matched) * dt if min(n_ref, n_hyp) > matched else 0.0
    return DerBreakdown(
        missed_s=missed, false_alarm_s=fa, confusion_s=confusion,
        scored_speech_s=scored, collar_s=collar_s,
    )


def id_accuracy(ref: list[RttmRecord], hyp_segments, ref_identity: dict[str, str] | None = None) -> float:
    """Time-weighted fraction of reference speech carrying the correct identity.

    hyp_segments: (TimeInterval, label) pairs or LabeledSegment list.
    ref_identity maps reference speaker names to expected display labels
    (identity mapping by default).
    """
    ref_identity = ref_identity or {}
    norm = []
    for seg in hyp_segments:
        if isinstance(seg, tuple):
            iv, label = seg
        else:
            iv, label = seg.interval, seg.label
        norm.append((iv.start_s, iv.end_s, label))

    events = set()
    for r in ref:
        events.update((r.onset_s, r.end_s))
    for s, e, _ in norm:
        events.update((s, e))
    pts = sorted(events)

    total = correct = 0.0
    for t0, t1 in zip(pts, pts[1:]):
        if t1 - t0 <= 1e-12:
            continue
        mid = (t0 + t1) / 2.0
        rs = [r for r in ref if r.onset_s < mid < r.end_s]
        if not rs:
            continue
        dt = t1 - t0
        total += dt
        hyp_label = next((lab for s, e, lab in norm if s < mid < e), None)
        expected = {ref_identity.get(r.speaker_name, r.speaker_name) for r in rs}
        if hyp_label is not None and hyp_label in expected:
            correct += dt
    return correct / total if total > 0 else 0.0


def rtf(audio_duration_s: float, wall_clock_s: float) -> float:
    """Real-time factor: processing time over audio time."""
    if audio_duration_s <= 0:
        raise ValueError("audio_duration_s must be > 0")
    return wall_clock_s / audio_duration_s
