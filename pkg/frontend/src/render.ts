/**
 * Pure view derivation: ViewModel in, draw list out.
 *
 * Keeping this a plain function of the view model makes "what would be on
 * screen" testable without a DOM; the canvas layer in app.ts just walks
 * the draw list.  Positions interpolate between the last two confirmed
 * snapshots for smoothness, never past them: alpha is clamped so the UI
 * cannot extrapolate a state the server has not sent.
 */

import { CharacterId, Snapshot } from "./protocol.js";
import { ViewModel } from "./viewmodel.js";

export type Pose = "repos" | "pas" | "elan";

export interface CharacterSprite {
  character: CharacterId;
  x: number;
  y: number;
  pose: Pose;
  opacity: number;
  intensityLabel: string;
  pulse: boolean;
  caption: string | null;
  crossfade: boolean;
  latticeIndex: [number, number];
}

export interface GainMeter {
  object: string;
  gain: number;
  beatOffset: number;
  box: [[number, number, number], [number, number, number]] | null;
}

export interface ParcoursView {
  listener: [number, number, number];
  riding: string | null;
  meters: GainMeter[];
}

export interface StageView {
  connection: string;
  banner: string | null;
  serverError: string | null;
  tick: number | null;
  sceneNode: string | null;
  sceneKind: string | null;
  lambda: number | null;
  decors: string[];
  sprites: CharacterSprite[];
  parcours: ParcoursView | null;
}

const PAS_SPEED = 0.2;
const ELAN_SPEED = 1.0;

export function poseFor(speed: number): Pose {
  if (speed >= ELAN_SPEED) return "elan";
  if (speed >= PAS_SPEED) return "pas";
  return "repos";
}

function lerp(a: number, b: number, alpha: number): number {
  return a + (b - a) * alpha;
}

function lastPhraseFor(snapshot: Snapshot, character: CharacterId) {
  for (let i = snapshot.phrases.length - 1; i >= 0; i--) {
    const phrase = snapshot.phrases[i];
    if (phrase !== undefined && phrase.character === character) return phrase;
  }
  return null;
}

/**
 * Interpolation weight inside the current snapshot period.
 * `nowMs` is wall clock; the period length comes from the hello.
 */
export function snapshotAlpha(vm: ViewModel, nowMs: number, receivedMs: number): number {
  if (vm.hello === null) return 1;
  const periodMs = (1000 / vm.hello.tick_rate) * vm.hello.snapshot_every;
  return Math.min(Math.max((nowMs - receivedMs) / periodMs, 0), 1);
}

export function stageView(vm: ViewModel, alpha = 1): StageView {
  const latest = vm.latest;
  const previous = vm.previous ?? latest;
  const sprites: CharacterSprite[] = [];
  let parcours: ParcoursView | null = null;

  if (latest !== null && previous !== null) {
    for (const character of ["femme", "homme"] as CharacterId[]) {
      const cur = latest.characters[character];
      const prev = previous.characters[character];
      const speed = Math.hypot(cur.velocity[0], cur.velocity[1]);
      const phrase = lastPhraseFor(latest, character);
      sprites.push({
        character,
        x: lerp(prev.position[0], cur.position[0], alpha),
        y: lerp(prev.position[1], cur.position[1], alpha),
        pose: poseFor(speed),
        opacity: cur.intensity,
        intensityLabel: cur.intensity.toFixed(2),
        pulse: vm.pulseActive(character),
        caption: phrase === null || phrase.silent ? null : phrase.text,
        crossfade: phrase !== null && phrase.crossfade,
        latticeIndex: cur.lattice_index,
      });
    }
    if (latest.mix !== null) {
      const boxes = new Map(
        (vm.hello?.cage.objects ?? []).map((o) => [o.id, o.box] as const),
      );
      parcours = {
        listener: latest.mix.listener.position,
        riding:
          latest.mix.listener.mode === "riding"
            ? latest.mix.listener.ride_object
            : null,
        meters: latest.mix.entries.map((entry) => ({
          object: entry.object,
          gain: entry.gain,
          beatOffset: entry.beat_offset,
          box: boxes.get(entry.object) ?? null,
        })),
      };
    }
  }

  return {
    connection: vm.connection,
    banner: vm.banner,
    serverError: vm.lastServerError,
    tick: latest?.tick ?? null,
    sceneNode: latest?.scene.node ?? null,
    sceneKind: latest?.scene.kind ?? null,
    lambda: latest?.lambda ?? null,
    decors:
      latest !== null && vm.hello !== null
        ? vm.hello.decors[latest.scene.node] ?? []
        : [],
    sprites,
    parcours,
  };
}

/** Maps stage coordinates to canvas pixels (y flipped, 10% margin). */
export function stageToCanvas(
  rect: [number, number, number, number],
  width: number,
  height: number,
): (x: number, y: number) => [number, number] {
  const [xmin, ymin, xmax, ymax] = rect;
  const mx = width * 0.1;
  const my = height * 0.1;
  const sx = (width - 2 * mx) / (xmax - xmin);
  const sy = (height - 2 * my) / (ymax - ymin);
  return (x, y) => [mx + (x - xmin) * sx, height - my - (y - ymin) * sy];
}

/** Inverse of stageToCanvas, for pointer hit-testing and drags. */
export function canvasToStage(
  rect: [number, number, number, number],
  width: number,
  height: number,
): (px: number, py: number) => [number, number] {
  const [xmin, ymin, xmax, ymax] = rect;
  const mx = width * 0.1;
  const my = height * 0.1;
  const sx = (width - 2 * mx) / (xmax - xmin);
  const sy = (height - 2 * my) / (ymax - ymin);
  return (px, py) => [xmin + (px - mx) / sx, ymin + (height - my - py) / sy];
}
