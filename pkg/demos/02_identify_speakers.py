"""Put names on the clusters: closed- and open-set speaker identification.

Enrolls voices from held-out clips, then labels diarization clusters by
cosine similarity against the enrolled references. The open-set run only
enrolls two of the three voices; the third comes back as Speaker1.
"""

from speakerkit import (
    BaselineBackend,
    IdentificationParams,
    SpeakerSet,
    assign_labels,
    diarize,
    enroll,
    generate_corpus,
)

corpus = generate_corpus(voices=3, turns=8, seed=1234)
backend = BaselineBackend()
clusters = diarize(corpus.buffer, backend)

# closed set: every voice is enrolled, the best match always wins
members = SpeakerSet(set_id="members", backend_id=backend.id)
for name in ["V1", "V2", "V3"]:
    enroll(members, name, corpus.enrollment[name], backend)

labeled = assign_labels(clusters, members, IdentificationParams(open_set=False))
print("closed set:")
for seg in labeled.segments[:6]:
    print(f"  {seg.interval.start_s:6.2f} - {seg.interval.end_s:6.2f}  "
          f"{seg.label:10s} score {seg.decision.score:.3f}")

# open set: V3 is not enrolled; scores below the 0.6 threshold -> unknown
partial = SpeakerSet(set_id="partial", backend_id=backend.id)
for name in ["V1", "V2"]:
    enroll(partial, name, corpus.enrollment[name], backend)

labeled = assign_labels(clusters, partial,
                        IdentificationParams(open_set=True, threshold=0.6))
print("\nopen set (V3 not enrolled):")
seen = set()
for seg in labeled.segments:
    if seg.label in seen:
        continue
    seen.add(seg.label)
    best = max(seg.decision.scores.values()) if seg.decision.scores else float("nan")
    print(f"  {seg.label:10s} ({seg.decision.kind}, best enrolled score {best:.3f})")
