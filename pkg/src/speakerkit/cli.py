"""Command-line entry points: offline runs, enrollment, scoring, corpus
generation and the HTTP server."""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from .audio import decode_wav
from .corpus import generate_corpus, write_corpus
from .errors import SpeakerkitError
from .metrics import RttmRecord, compute_der, parse_rttm, write_rttm
from .orchestrator import Orchestrator, load_config, run_pipeline
from .transcript import export_json, export_srt


@click.group()
def main():
    """Joint speaker diarization and identification toolkit."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(path_type=Path))
@click.option("--setup", "setup_id", required=True)
@click.option("--sidecar", type=click.Path(exists=True, path_type=Path), default=None,
              help="Timed reference transcript JSON: [{start_s, end_s, text}]")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--data-dir", type=click.Path(path_type=Path), default=None,
              help="Overrides the configured data directory (speaker sets).")
def run(input_path, setup_id, sidecar, out_dir, config_path, data_dir):
    """Run the full pipeline offline; writes result.json, result.srt, hyp.rttm."""
    if not input_path.exists():
        raise click.UsageError(f"input file {input_path} does not exist")
    cfg = load_config(config_path)
    if data_dir is not None:
        cfg.data_dir = data_dir
    setups = {s.setup_id: s for s in cfg.setups}
    if setup_id not in setups:
        raise click.UsageError(f"unknown setup {setup_id!r}; have {sorted(setups)}")
    setup = setups[setup_id]

    try:
        buf = decode_wav(input_path.read_bytes())
        speaker_set = None
        if setup.si.enabled and setup.si.speaker_set_id:
            orch = Orchestrator(cfg)
            speaker_set = orch.speaker_sets.load(setup.si.speaker_set_id)
        sidecar_lines = json.loads(sidecar.read_text()) if sidecar else None

        t0 = time.perf_counter()
        doc = run_pipeline(buf, setup, speaker_set, media_id=input_path.stem, sidecar=sidecar_lines)
        wall = time.perf_counter() - t0

        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "result.json").write_text(export_json(doc) + "\n")
        (out_dir / "result.srt").write_text(export_srt(doc))
        records = [
            RttmRecord(file_id=input_path.stem, onset_s=round(s.interval.start_s, 3),
                       duration_s=round(s.interval.duration_s, 3), speaker_name=s.speaker_label)
            for s in doc.segments
        ]
        (out_dir / "hyp.rttm").write_text(write_rttm(records))
        rtf = wall / max(doc.duration_s, 1e-9)
        click.echo(f"RTF {rtf:.3f} ({wall:.2f} s wall for {doc.duration_s:.2f} s audio)")
    except SpeakerkitError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)


@main.command()
@click.option("--set", "set_id", required=True)
@click.option("--name", "display_name", required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--data-dir", type=click.Path(path_type=Path), default=None)
@click.argument("utterances", nargs=-1, type=click.Path(path_type=Path))
def enroll(set_id, display_name, config_path, data_dir, utterances):
    """Enroll a speaker from one or more WAV utterances."""
    if not utterances:
        raise click.UsageError("at least one utterance WAV is required")
    for u in utterances:
        if not u.exists():
            raise click.UsageError(f"utterance {u} does not exist")
    cfg = load_config(config_path)
    if data_dir is not None:
        cfg.data_dir = data_dir
    orch = Orchestrator(cfg)
    try:
        if not orch.speaker_sets.exists(set_id):
            orch.speaker_sets.create(set_id)
        bufs = [decode_wav(u.read_bytes()) for u in utterances]
        profile = orch.speaker_sets.enroll(set_id, display_name, bufs)
        click.echo(profile.speaker_id)
    except SpeakerkitError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)


@main.command(name="eval-der")
@click.option("--ref", "ref_path", required=True, type=click.Path(path_type=Path))
@click.option("--hyp", "hyp_path", required=True, type=click.Path(path_type=Path))
@click.option("--collar", default=0.25, show_default=True)
def eval_der(ref_path, hyp_path, collar):
    """Score a hypothesis RTTM against a reference RTTM."""
    for p in (ref_path, hyp_path):
        if not p.exists():
            raise click.UsageError(f"{p} does not exist")
    try:
        ref = parse_rttm(ref_path.read_text())
        hyp = parse_rttm(hyp_path.read_text())
        b = compute_der(ref, hyp, collar_s=collar)
        click.echo(
            f"DER {b.der:.3f}  missed {b.missed_s:.3f}s  false_alarm {b.false_alarm_s:.3f}s  "
            f"confusion {b.confusion_s:.3f}s  scored {b.scored_speech_s:.3f}s  collar {b.collar_s:.2f}s"
        )
    except SpeakerkitError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)


@main.command(name="gen-corpus")
@click.option("--voices", default=3, show_default=True)
@click.option("--turns", default=8, show_default=True, help="Turns per voice.")
@click.option("--turn-s", default=2.0, show_default=True)
@click.option("--gap-s", default=0.4, show_default=True)
@click.option("--overlap", default=0.0, show_default=True, help="Seconds of overlap into the next turn.")
@click.option("--seed", default=1234, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def gen_corpus(voices, turns, turn_s, gap_s, overlap, seed, out_dir):
    """Generate a synthetic multi-speaker corpus with truth annotations."""
    corpus = generate_corpus(voices=voices, turns=turns, turn_s=turn_s, gap_s=gap_s,
                             overlap=overlap, seed=seed)
    paths = write_corpus(corpus, out_dir)
    click.echo(f"wrote {paths['wav']} ({corpus.buffer.duration_s:.1f} s, {voices} voices)")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--port", type=int, default=None)
@click.option("--data-dir", type=click.Path(path_type=Path), default=None)
@click.option("--static-dir", type=click.Path(path_type=Path), default=None,
              help="Directory of built web UI assets to serve at /.")
def serve(config_path, port, data_dir, static_dir):
    """Start the HTTP service with the worker pool."""
    import uvicorn

    from .server import create_app

    cfg = load_config(config_path)
    if port is not None:
        cfg.port = port
    if data_dir is not None:
        cfg.data_dir = data_dir
    orch = Orchestrator(cfg)
    orch.start()
    if static_dir is None:
        default_static = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        if default_static.is_dir():
            static_dir = default_static
    app = create_app(orch, static_dir=static_dir)
    try:
        uvicorn.run(app, host="127.0.0.1", port=cfg.port)
    finally:
        orch.stop()


if __name__ == "__main__":
    main()
