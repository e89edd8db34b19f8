/** DOM rendering for the three pages. All data flows through ApiClient;
 * all geometry goes through the pure helpers in highlight.ts. */

import { ApiClient, ConflictError, Job, SetupInfo, TranscriptDoc } from "./api.js";
import { activeSegmentIndex, exportFilename, formatClock, seekTarget } from "./highlight.js";

const POLL_MS = 1000;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  node.append(...children);
  return node;
}

export interface View {
  mount(root: HTMLElement): void;
  unmount(): void;
}

export class SubmitPage implements View {
  private timer: number | undefined;

  constructor(private api: ApiClient) {}

  async mount(root: HTMLElement): Promise<void> {
    root.replaceChildren(el("h1", {}, ["New job"]));
    let setups: SetupInfo[];
    try {
      setups = await this.api.listSetups();
    } catch (e) {
      root.append(el("p", { class: "error" }, [`could not load setups: ${(e as Error).message}`]));
      return;
    }

    const select = el("select", { id: "setup" });
    for (const s of setups) {
      select.append(el("option", { value: s.setup_id }, [s.title]));
    }
    const description = el("p", { class: "setup-description" });
    const syncDescription = () => {
      const s = setups.find((x) => x.setup_id === select.value);
      description.textContent = s ? s.description : "";
    };
    select.addEventListener("change", syncDescription);
    syncDescription();

    const fileInput = el("input", { type: "file", accept: ".wav,audio/wav" });
    const error = el("p", { class: "error", hidden: "" });
    const submit = el("button", {}, ["Submit"]);

    const doSubmit = async (file: File) => {
      error.hidden = true;
      try {
        await this.api.submitJob(file, file.name, select.value);
        location.hash = "#/jobs";
      } catch (e) {
        error.hidden = false;
        error.textContent = (e as Error).message;
      }
    };
    submit.addEventListener("click", () => {
      const file = fileInput.files?.[0];
      if (file) void doSubmit(file);
    });

    const drop = el("div", { class: "dropzone" }, ["drop a WAV file here", fileInput]);
    drop.addEventListener("dragover", (ev) => ev.preventDefault());
    drop.addEventListener("drop", (ev) => {
      ev.preventDefault();
      const file = ev.dataTransfer?.files?.[0];
      if (file) void doSubmit(file);
    });

    root.append(
      el("label", { for: "setup" }, ["Configuration setup"]),
      select,
      description,
      drop,
      submit,
      error,
    );
  }

  unmount(): void {
    if (this.timer !== undefined) clearInterval(this.timer);
  }
}

const TERMINAL = new Set(["COMPLETED", "FAILED"]);

export class JobsPage implements View {
  private timer: number | undefined;

  constructor(private api: ApiClient) {}

  mount(root: HTMLElement): void {
    root.replaceChildren(el("h1", {}, ["Jobs"]), el("div", { id: "job-list" }, ["loading..."]));
    const refresh = async () => {
      let jobs: Job[];
      try {
        jobs = await this.api.listJobs();
      } catch {
        return; // transient poll failure, try again next tick
      }
      jobs.sort((a, b) => b.submitted_at - a.submitted_at);
      const list = root.querySelector("#job-list");
      if (!list) return;
      list.replaceChildren(...jobs.map((j) => this.row(j)));
      if (jobs.every((j) => TERMINAL.has(j.state)) && this.timer !== undefined) {
        clearInterval(this.timer);
        this.timer = undefined;
      }
    };
    void refresh();
    this.timer = window.setInterval(refresh, POLL_MS);
  }

  private row(j: Job): HTMLElement {
    const cells: (Node | string)[] = [
      el("span", { class: "job-id" }, [j.job_id.slice(0, 8)]),
      el("span", {}, [j.setup_id]),
      el("span", { class: `state state-${j.state.toLowerCase()}` }, [j.state]),
      el("span", {}, [j.rtf !== null ? `RTF ${j.rtf.toFixed(2)}` : ""]),
    ];
    if (j.state === "COMPLETED") {
      cells.push(el("a", { href: `#/jobs/${j.job_id}` }, ["view result"]));
    } else if (j.state === "FAILED") {
      cells.push(el("span", { class: "error" }, [j.error ?? "failed"]));
    }
    return el("div", { class: "job-row" }, cells);
  }

  unmount(): void {
    if (this.timer !== undefined) clearInterval(this.timer);
  }
}

export class ResultPage implements View {
  private doc: TranscriptDoc | null = null;
  private player: HTMLAudioElement | null = null;
  private rows: HTMLElement[] = [];
  private highlighted = -1;
  private raf: number | undefined;

  constructor(private api: ApiClient, private jobId: string) {}

  async mount(root: HTMLElement): Promise<void> {
    root.replaceChildren(el("h1", {}, ["Result"]));
    let job: Job;
    try {
      job = await this.api.getJob(this.jobId);
    } catch (e) {
      root.append(el("p", { class: "error" }, [(e as Error).message]));
      return;
    }
    if (job.state !== "COMPLETED") {
      root.append(el("p", {}, [`job is ${job.state}; results render only once completed.`]));
      return;
    }
    this.doc = await this.api.getResult(this.jobId);

    this.player = el("audio", { controls: "", src: this.api.mediaPath(this.jobId) });
    const exportLink = el("a", {
      class: "button",
      href: this.api.exportPath(this.jobId),
      download: exportFilename(this.doc.media_id),
    }, ["Download SRT"]);
    const notice = el("p", { class: "notice", hidden: "" });
    const table = el("div", { class: "segments" });
    root.append(this.player, exportLink, notice, table);
    this.renderSegments(table, notice);

    const tick = () => {
      this.syncHighlight();
      this.raf = requestAnimationFrame(tick);
    };
    this.raf = requestAnimationFrame(tick);
  }

  private renderSegments(table: HTMLElement, notice: HTMLElement): void {
    if (!this.doc) return;
    this.rows = this.doc.segments.map((seg, i) => {
      const row = el("div", { class: "segment-row", "data-index": String(i) }, [
        el("span", { class: "time" }, [`${formatClock(seg.start_s)} – ${formatClock(seg.end_s)}`]),
        el("span", { class: "speaker" }, [seg.speaker]),
        el("span", { class: "text" }, [seg.text]),
      ]);
      row.addEventListener("click", () => {
        if (this.player) this.player.currentTime = seekTarget(seg);
      });
      row.addEventListener("dblclick", () => void this.editText(i, notice, table));
      return row;
    });
    table.replaceChildren(...this.rows);
  }

  private async editText(index: number, notice: HTMLElement, table: HTMLElement): Promise<void> {
    if (!this.doc) return;
    const current = this.doc.segments[index];
    const text = window.prompt("Segment text", current.text);
    if (text === null) return;
    try {
      this.doc = await this.api.applyEdit(this.jobId, {
        segment_index: index,
        new_text: text,
        expected_revision: this.doc.revision,
      });
      notice.hidden = true;
    } catch (e) {
      if (e instanceof ConflictError) {
        // someone else edited first: refetch, surface, never overwrite
        this.doc = await this.api.getResult(this.jobId);
        notice.hidden = false;
        notice.textContent =
          "This transcript changed in another session; your edit was not applied. Showing the latest version.";
      } else {
        notice.hidden = false;
        notice.textContent = (e as Error).message;
      }
    }
    this.renderSegments(table, notice);
  }

  private syncHighlight(): void {
    if (!this.player || !this.doc) return;
    const idx = activeSegmentIndex(this.player.currentTime, this.doc.segments);
    if (idx === this.highlighted) return;
    if (this.highlighted >= 0) this.rows[this.highlighted]?.classList.remove("active");
    if (idx >= 0) this.rows[idx]?.classList.add("active");
    this.highlighted = idx;
  }

  unmount(): void {
    if (this.raf !== undefined) cancelAnimationFrame(this.raf);
    this.player?.pause();
  }
}
