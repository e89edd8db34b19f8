"""Diarization error rate from RTTM files, with collar and optimal mapping.

Builds a small reference/hypothesis pair by hand to show how missed speech,
false alarm and speaker confusion each contribute, then shows the collar
forgiving small boundary jitter.
"""

from speakerkit.metrics import RttmRecord, compute_der, parse_rttm, write_rttm

ref = [
    RttmRecord("f", 0.0, 4.0, "alice"),
    RttmRecord("f", 4.0, 4.0, "bob"),
    RttmRecord("f", 9.0, 2.0, "alice"),
]
hyp = [
    RttmRecord("f", 0.0, 4.0, "spk1"),
    RttmRecord("f", 4.0, 3.0, "spk2"),   # last second of bob missed
    RttmRecord("f", 8.5, 2.5, "spk2"),   # alice's return confused with spk2
]

b = compute_der(ref, hyp, collar_s=0.0)
print("no collar:")
print(f"  missed {b.missed_s:.2f} s, false alarm {b.false_alarm_s:.2f} s, "
      f"confusion {b.confusion_s:.2f} s over {b.scored_speech_s:.2f} s -> DER {b.der:.3f}")

b = compute_der(ref, hyp, collar_s=0.25)
print(f"0.25 s collar: DER {b.der:.3f} (boundary jitter excised)")

# RTTM text round-trips byte-exactly
text = write_rttm(ref)
print("\n" + text, end="")
assert write_rttm(parse_rttm(text)) == text
