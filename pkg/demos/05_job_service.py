"""The job orchestrator: submit, process, recover.

Runs the file-persisted worker pool end to end in a temp directory:
a WAV is submitted, a worker picks it up FIFO, the attributed transcript
is persisted, and a simulated crash-restart re-queues the interrupted job.
"""

import tempfile
from pathlib import Path

from speakerkit import generate_corpus
from speakerkit.audio import encode_wav
from speakerkit.orchestrator import AppConfig, Orchestrator

corpus = generate_corpus(voices=2, turns=3, seed=3)
wav = encode_wav(corpus.buffer)

with tempfile.TemporaryDirectory() as tmp:
    data_dir = Path(tmp) / "data"

    o = Orchestrator(AppConfig(data_dir=data_dir, workers=2))
    o.start()
    job_id = o.submit(wav, "speech-analytics")
    o.wait_idle(timeout=60)
    o.stop()

    job = o.get_job(job_id)
    doc = o.get_result(job_id)
    print(f"job {job.job_id[:8]} {job.state}, RTF {job.rtf:.3f}, "
          f"{len(doc.segments)} transcript segments")

    # crash recovery: a job left RUNNING on disk is re-queued on restart
    o2 = Orchestrator(AppConfig(data_dir=data_dir, workers=1))
    j2 = o2.submit(wav, "speech-analytics")
    o2._transition(o2.get_job(j2), "RUNNING")  # pretend the process died here

    o3 = Orchestrator(AppConfig(data_dir=data_dir, workers=1))
    o3.recover()
    print(f"after restart: job {j2[:8]} is {o3.get_job(j2).state}")
    o3.start()
    o3.wait_idle(timeout=60)
    o3.stop()
    print(f"after draining: job {j2[:8]} is {o3.get_job(j2).state}")
