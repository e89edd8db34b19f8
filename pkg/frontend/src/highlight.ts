/** Pure playhead/segment geometry — no DOM, unit-testable in isolation. */

export interface TimedSegment {
  start_s: number;
  end_s: number;
}

/** Index of the segment containing the playhead, or -1 in a gap.
 *
 * Containment is half-open [start_s, end_s) so back-to-back segments never
 * both claim the boundary instant; when segments overlap, the earliest wins.
 */
export function activeSegmentIndex(playheadS: number, segments: readonly TimedSegment[]): number {
  for (let i = 0; i < segments.length; i++) {
    const s = segments[i];
    if (playheadS >= s.start_s && playheadS < s.end_s) return i;
  }
  return -1;
}

/** Seek target for clicking a segment row: its start time. */
export function seekTarget(segment: TimedSegment): number {
  return segment.start_s;
}

/** h:mm:ss.t display clock. */
export function formatClock(t: number): string {
  const sign = t < 0 ? "-" : "";
  t = Math.abs(t);
  const h = Math.floor(t / 3600);
  const m = Math.floor((t % 3600) / 60);
  const s = t % 60;
  const ss = s.toFixed(1).padStart(4, "0");
  return h > 0 ? `${sign}${h}:${String(m).padStart(2, "0")}:${ss}` : `${sign}${m}:${ss}`;
}

/** Suggested filename for the SRT download, derived from the media id. */
export function exportFilename(mediaId: string): string {
  return `${mediaId || "transcript"}.srt`;
}
