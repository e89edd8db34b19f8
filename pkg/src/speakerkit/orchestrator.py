"""Job orchestration: configuration setups, pipeline execution, worker pool,
file-based persistence with crash recovery."""

from __future__ import annotations

import hashlib
import json
import os
import queue
import threading
import time
import uuid
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import yaml

from .audio import CANONICAL_RATE, AudioBuffer, decode_wav, resample, slice_buffer
from .diarization import DiarizationParams, diarize
from .embedding import get_backend
from .errors import ConfigError, UnknownSetup
from .identification import (
    IdentificationParams,
    IdentityDecision,
    LabeledDiarization,
    LabeledSegment,
    SpeakerProfile,
    SpeakerSet,
    enroll,
    identify,
)
from .metrics import rtf as compute_rtf
from .transcript import TranscriptDocument, attribute, get_asr_engine
from .embedding import SpeakerEmbedding
from .transcript import doc_from_dict, doc_to_dict
from .vad import VadParams, detect_speech

JOB_STATES = ("SUBMITTED", "QUEUED", "RUNNING", "COMPLETED", "FAILED")
_LEGAL = {
    "SUBMITTED": {"QUEUED"},
    "QUEUED": {"RUNNING"},
    "RUNNING": {"COMPLETED", "FAILED"},
    "COMPLETED": set(),
    "FAILED": set(),
}


@dataclass(frozen=True)
class SiConfig:
    enabled: bool = False
    speaker_set_id: str | None = None
    params: IdentificationParams = field(default_factory=IdentificationParams)


@dataclass(frozen=True)
class AsrConfig:
    engine_id: str = "mock"
    language: str = "xx"


@dataclass(frozen=True)
class ConfigSetup:
    setup_id: str
    title: str
    description: str
    preprocessing: str  # "SD" | "VAD_ONLY"
    backend_id: str = "baseline-melstats"
    diarization: DiarizationParams = field(default_factory=DiarizationParams)
    vad: VadParams = field(default_factory=VadParams)
    si: SiConfig = field(default_factory=SiConfig)
    asr: AsrConfig = field(default_factory=AsrConfig)


@dataclass
class Job:
    job_id: str
    media_id: str
    setup_id: str
    state: str = "SUBMITTED"
    submitted_at: float = 0.0
    started_at: float | None = None
    finished_at: float | None = None
    rtf: float | None = None
    error: str | None = None
    result_ref: str | None = None


DEFAULT_SETUPS = [
    ConfigSetup(
        setup_id="media-monitoring",
        title="Media monitoring",
        description="Diarization plus open-set identification against the newsroom "
        "speaker set; unidentified voices become numbered unknown speakers.",
        preprocessing="SD",
        si=SiConfig(enabled=True, speaker_set_id="newsroom", params=IdentificationParams(open_set=True, threshold=0.6)),
    ),
    ConfigSetup(
        setup_id="speech-analytics",
        title="Speech analytics",
        description="Diarization only: anonymous speaker turns with cluster labels, "
        "no registered-speaker matching.",
        preprocessing="SD",
        si=SiConfig(enabled=False),
    ),
    ConfigSetup(
        setup_id="institutional",
        title="Institutional sessions",
        description="Diarization plus closed-set identification: every turn is "
        "assigned to the best-matching enrolled member.",
        preprocessing="SD",
        si=SiConfig(enabled=True, speaker_set_id="members", params=IdentificationParams(open_set=False)),
    ),
]


@dataclass
class AppConfig:
    data_dir: Path = Path("./data")
    workers: int = 2
    port: int = 8000
    max_upload_bytes: int = 512 * 1024 * 1024
    setups: list[ConfigSetup] = field(default_factory=lambda: list(DEFAULT_SETUPS))


def _setup_from_dict(d: dict) -> ConfigSetup:
    try:
        si_d = d.get("si", {})
        si = SiConfig(
            enabled=bool(si_d.get("enabled", False)),
            speaker_set_id=si_d.get("speaker_set"),
            params=IdentificationParams(
                open_set=bool(si_d.get("open_set", True)),
                threshold=float(si_d.get("threshold", 0.6)),
            ),
        )
        return ConfigSetup(
            setup_id=d["setup_id"],
            title=d.get("title", d["setup_id"]),
            description=d.get("description", ""),
            preprocessing=d.get("preprocessing", "SD"),
            backend_id=d.get("backend", "baseline-melstats"),
            diarization=DiarizationParams(**d.get("diarization", {})),
            vad=VadParams(**d.get("vad", {})),
            si=si,
            asr=AsrConfig(
                engine_id=d.get("asr", {}).get("engine", "mock"),
                language=d.get("asr", {}).get("language", "xx"),
            ),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"bad setup entry: {e}") from e


def load_config(path: str | Path | None = None) -> AppConfig:
    """Load the YAML configuration; env vars SPEAKERKIT_PORT and
    SPEAKERKIT_DATA_DIR override file values."""
    cfg = AppConfig()
    if path is not None:
        try:
            raw = yaml.safe_load(Path(path).read_text())
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        except yaml.YAMLError as e:
            raise ConfigError(f"invalid YAML in {path}: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a mapping")
        cfg.data_dir = Path(raw.get("data_dir", cfg.data_dir))
        cfg.workers = int(raw.get("workers", cfg.workers))
        cfg.port = int(raw.get("port", cfg.port))
        cfg.max_upload_bytes = int(raw.get("max_upload_bytes", cfg.max_upload_bytes))
        if "setups" in raw:
            cfg.setups = [_setup_from_dict(d) for d in raw["setups"]]

    ids = [s.setup_id for s in cfg.setups]
    if len(ids) != len(set(ids)):
        raise ConfigError(f"duplicate setup ids in catalog: {ids}")
    if not cfg.setups:
        raise ConfigError("catalog must contain at least one setup")

    if os.environ.get("SPEAKERKIT_PORT"):
        cfg.port = int(os.environ["SPEAKERKIT_PORT"])
    if os.environ.get("SPEAKERKIT_DATA_DIR"):
        cfg.data_dir = Path(os.environ["SPEAKERKIT_DATA_DIR"])
    return cfg


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class SpeakerSetStore:
    """One JSON document per speaker set; writes serialized by a lock."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, set_id: str) -> Path:
        return self.root / f"{set_id}.json"

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json"))

    def exists(self, set_id: str) -> bool:
        return self._path(set_id).exists()

    def create(self, set_id: str, backend_id: str = "baseline-melstats") -> SpeakerSet:
        with self._lock:
            if self.exists(set_id):
                raise ValueError(f"speaker set {set_id!r} already exists")
            s = SpeakerSet(set_id=set_id, backend_id=backend_id)
            self._save(s)
            return s

    def load(self, set_id: str) -> SpeakerSet:
        doc = json.loads(self._path(set_id).read_text())
        profiles = [
            SpeakerProfile(
                speaker_id=p["speaker_id"],
                display_name=p["display_name"],
                reference=SpeakerEmbedding(values=p["reference"], backend_id=doc["backend_id"]),
                n_utterances=int(p["n_utterances"]),
                enrolled_at=float(p["enrolled_at"]),
            )
            for p in doc["profiles"]
        ]
        return SpeakerSet(set_id=doc["set_id"], backend_id=doc["backend_id"], profiles=profiles)

    def _save(self, s: SpeakerSet) -> None:
        doc = {
            "set_id": s.set_id,
            "backend_id": s.backend_id,
            "profiles": [
                {
                    "speaker_id": p.speaker_id,
                    "display_name": p.display_name,
                    "reference": list(p.reference.values),
                    "n_utterances": p.n_utterances,
                    "enrolled_at": p.enrolled_at,
                }
                for p in s.profiles
            ],
        }
        _atomic_write(self._path(s.set_id), json.dumps(doc, indent=2).encode())

    def enroll(self, set_id: str, display_name: str, utterances: list[AudioBuffer]) -> SpeakerProfile:
        with self._lock:
            s = self.load(set_id)
            profile = enroll(s, display_name, utterances, get_backend(s.backend_id))
            self._save(s)
            return profile

    def delete_speaker(self, set_id: str, speaker_id: str) -> bool:
        with self._lock:
            s = self.load(set_id)
            before = len(s.profiles)
            s.profiles = [p for p in s.profiles if p.speaker_id != speaker_id]
            if len(s.profiles) == before:
                return False
            self._save(s)
            return True


def run_pipeline(
    buf: AudioBuffer,
    setup: ConfigSetup,
    speaker_set: SpeakerSet | None,
    media_id: str,
    sidecar: list[dict] | None = None,
) -> TranscriptDocument:
    """Execute one analysis job over an in-memory buffer."""
    buf = resample(buf, CANONICAL_RATE)
    backend = get_backend(setup.backend_id)

    if setup.preprocessing == "SD":
        d = diarize(buf, backend, setup.vad, setup.diarization)
        if setup.si.enabled:
            from .identification import assign_labels

            labeled = assign_labels(d, speaker_set, setup.si.params)
        else:
            labeled = LabeledDiarization(
                segments=[
                    LabeledSegment(interval=iv, label=c, cluster=c,
                                   decision=IdentityDecision(kind="unknown", scores={}))
                    for iv, c in d.segments
                ],
                decisions={},
            )
        speech = [seg.interval for seg in labeled.segments]
    elif setup.preprocessing == "VAD_ONLY":
        speech = detect_speech(buf, setup.vad)
        segments = []
        n_unknown = 0
        for iv in speech:
            if setup.si.enabled:
                emb = backend.extract(slice_buffer(buf, iv))
                dec = identify(emb, speaker_set, setup.si.params)
                if dec.kind == "known":
                    display = {p.speaker_id: p.display_name for p in speaker_set.profiles}
                    label = display[dec.speaker_id]
                else:
                    n_unknown += 1
                    dec = replace(dec, unknown_index=n_unknown)
                    label = f"Speaker{n_unknown}"
            else:
                dec = IdentityDecision(kind="unknown", scores={})
                label = "Speaker1"
            segments.append(LabeledSegment(interval=iv, label=label, cluster="V1", decision=dec))
        labeled = LabeledDiarization(segments=segments, decisions={})
    else:
        raise ConfigError(f"unknown preprocessing mode {setup.preprocessing!r}")

    if sidecar is not None:
        from .transcript import mock_transcribe

        asr_segments = mock_transcribe(buf, speech, sidecar)
    else:
        engine = get_asr_engine(setup.asr.engine_id)
        asr_segments = engine.transcribe(buf, speech)
    attributed = attribute(asr_segments, labeled)
    return TranscriptDocument(
        media_id=media_id,
        duration_s=buf.duration_s,
        setup_id=setup.setup_id,
        segments=attributed,
        revision=0,
    )


class Orchestrator:
    """Owns the job queue, worker threads and on-disk job state."""

    def __init__(self, config: AppConfig):
        self.config = config
        self.data_dir = Path(config.data_dir)
        self.jobs_dir = self.data_dir / "jobs"
        self.jobs_dir.mkdir(parents=True, exist_ok=True)
        self.speaker_sets = SpeakerSetStore(self.data_dir / "speaker_sets")
        self.setups = {s.setup_id: s for s in config.setups}
        self._queue: queue.Queue[str] = queue.Queue()
        self._workers: list[threading.Thread] = []
        self._stop = threading.Event()
        self._job_lock = threading.Lock()
        self._running_count = 0
        self._ensure_referenced_sets()

    # -- catalog ---------------------------------------------------------

    def catalog(self) -> list[ConfigSetup]:
        return list(self.config.setups)

    def _ensure_referenced_sets(self) -> None:
        for s in self.config.setups:
            if s.si.enabled and s.si.speaker_set_id and not self.speaker_sets.exists(s.si.speaker_set_id):
                self.speaker_sets.create(s.si.speaker_set_id, s.backend_id)

    # -- persistence -----------------------------------------------------

    def _job_dir(self, job_id: str) -> Path:
        return self.jobs_dir / job_id

    def _save_job(self, job: Job) -> None:
        _atomic_write(self._job_dir(job.job_id) / "job.json", json.dumps(asdict(job), indent=2).encode())

    def _load_job(self, job_id: str) -> Job:
        path = self._job_dir(job_id) / "job.json"
        return Job(**json.loads(path.read_text()))

    def get_job(self, job_id: str) -> Job | None:
        try:
            return self._load_job(job_id)
        except (OSError, json.JSONDecodeError):
            return None

    def list_jobs(self) -> list[Job]:
        jobs = []
        for d in self.jobs_dir.iterdir():
            if (d / "job.json").exists():
                jobs.append(self._load_job(d.name))
        return sorted(jobs, key=lambda j: j.submitted_at)

    def _transition(self, job: Job, state: str) -> Job:
        if state not in _LEGAL[job.state]:
            raise ValueError(f"illegal transition {job.state} -> {state}")
        job.state = state
        self._save_job(job)
        return job

    def get_result(self, job_id: str) -> TranscriptDocument | None:
        path = self._job_dir(job_id) / "result.json"
        if not path.exists():
            return None
        return doc_from_dict(json.loads(path.read_text()))

    def save_result(self, job_id: str, doc: TranscriptDocument) -> None:
        _atomic_write(self._job_dir(job_id) / "result.json", json.dumps(doc_to_dict(doc), indent=2).encode())

    def media_path(self, job_id: str) -> Path:
        return self._job_dir(job_id) / "media.wav"

    # -- job lifecycle ---------------------------------------------------

    def submit(self, media: bytes, setup_id: str) -> str:
        if setup_id not in self.setups:
            raise UnknownSetup(f"unknown setup {setup_id!r}")
        decode_wav(media)  # eager validation; raises MalformedContainer
        job_id = uuid.uuid4().hex[:12]
        media_id = hashlib.sha1(media).hexdigest()[:12]
        job_dir = self._job_dir(job_id)
        job_dir.mkdir(parents=True)
        _atomic_write(job_dir / "media.wav", media)
        job = Job(job_id=job_id, media_id=media_id, setup_id=setup_id, submitted_at=time.time())
        self._save_job(job)
        self._transition(job, "QUEUED")
        self._queue.put(job_id)
        return job_id

    def run_job(self, job: Job) -> None:
        """Execute one QUEUED job to a terminal state."""
        job.started_at = time.time()
        self._transition(job, "RUNNING")
        try:
            media = self.media_path(job.job_id).read_bytes()
            buf = decode_wav(media)
            setup = self.setups[job.setup_id]
            speaker_set = None
            if setup.si.enabled and setup.si.speaker_set_id:
                # snapshot: a fresh load, unaffected by later enrollment
                speaker_set = self.speaker_sets.load(setup.si.speaker_set_id)
            t0 = time.perf_counter()
            doc = run_pipeline(buf, setup, speaker_set, job.media_id)
            wall = time.perf_counter() - t0
            self.save_result(job.job_id, doc)
            job.rtf = compute_rtf(max(buf.duration_s, 1e-9), wall)
            job.result_ref = "result.json"
            job.finished_at = time.time()
            self._transition(job, "COMPLETED")
        except Exception as e:  # any stage failure lands in job.error
            result = self._job_dir(job.job_id) / "result.json"
            if result.exists():
                result.unlink()
            job.error = f"{type(e).__name__}: {e}"
            job.finished_at = time.time()
            self._transition(job, "FAILED")

    # -- worker pool -----------------------------------------------------

    def _worker_loop(self) -> None:
        while not self._stop.is_set():
            try:
                job_id = self._queue.get(timeout=0.1)
            except queue.Empty:
                continue
            try:
                job = self._load_job(job_id)
                if job.state == "QUEUED":
                    with self._job_lock:
                        self._running_count += 1
                    try:
                        self.run_job(job)
                    finally:
                        with self._job_lock:
                            self._running_count -= 1
            except Exception:
                pass  # worker survives malformed records
            finally:
                self._queue.task_done()

    def start(self) -> None:
        self.recover()
        for i in range(self.config.workers):
            t = threading.Thread(target=self._worker_loop, name=f"worker-{i}", daemon=True)
            t.start()
            self._workers.append(t)

    def stop(self, wait: bool = True) -> None:
        self._stop.set()
        if wait:
            for t in self._workers:
                t.join(timeout=10)
        self._workers.clear()
        self._stop = threading.Event()

    def recover(self) -> None:
        """Re-queue jobs interrupted mid-run; terminal jobs untouched."""
        pending = []
        for job in self.list_jobs():
            if job.state == "RUNNING":
                job.state = "QUEUED"  # direct reset, bypasses the forward-only check
                job.started_at = None
                self._save_job(job)
                pending.append(job)
            elif job.state in ("QUEUED", "SUBMITTED"):
                if job.state == "SUBMITTED":
                    self._transition(job, "QUEUED")
                pending.append(job)
        for job in sorted(pending, key=lambda j: j.submitted_at):
            self._queue.put(job.job_id)

    def wait_idle(self, timeout: float = 60.0) -> bool:
        """Block until no job is QUEUED or RUNNING (test helper)."""
        deadline = time.time() + timeout
        while time.time() < deadline:
            jobs = self.list_jobs()
            if all(j.state in ("COMPLETED", "FAILED") for j in jobs) and self._queue.empty():
                return True
            time.sleep(0.05)
        return False
