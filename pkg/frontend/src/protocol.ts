/**
 * Wire schema for the session protocol: line-delimited JSON.
 *
 * Server to client: one hello object on attach, then snapshot objects at
 * the snapshot rate, plus `{"error": ...}` replies for malformed lines.
 * Client to server: user event objects; a missing tick means "apply at
 * arrival".  These types mirror the server's schema exactly; the UI adds
 * nothing and simulates nothing.
 */

export type CharacterId = "femme" | "homme";

export interface CharacterView {
  position: [number, number];
  velocity: [number, number];
  intensity: number;
  lattice_pos: [number, number];
  lattice_index: [number, number];
}

export interface MixEntry {
  object: string;
  gain: number;
  beat_offset: number;
}

export interface ListenerView {
  position: [number, number, number];
  mode: "free_flight" | "riding";
  ride_object: string | null;
  path_param: number;
}

export interface MixView {
  listener: ListenerView;
  entries: MixEntry[];
}

export interface PhraseView {
  character: CharacterId;
  index: [number, number];
  text: string | null;
  melody_ref: string | null;
  gain: number;
  crossfade: boolean;
  silent: boolean;
}

export interface EventRecord {
  event: { kind: string; tick: number } & Record<string, unknown>;
  accepted: boolean;
  reason: string | null;
}

export interface Snapshot {
  tick: number;
  lambda: number;
  scene: { node: string; kind: string; ticks_in_scene: number };
  characters: Record<CharacterId, CharacterView>;
  mix: MixView | null;
  phrases: PhraseView[];
  events: EventRecord[];
}

export interface Hello {
  schema_version: number;
  scenario_hash: string;
  snapshot_every: number;
  tick_rate: number;
  stage_rect: [number, number, number, number];
  cage: {
    box: [[number, number, number], [number, number, number]];
    objects: { id: string; box: [[number, number, number], [number, number, number]] }[];
  };
  decors: Record<string, string[]>;
}

export type UserEvent =
  | { kind: "relaunch_character"; character: CharacterId; tick?: number }
  | { kind: "drag_character"; character: CharacterId; position: [number, number]; tick?: number }
  | { kind: "set_lambda"; value: number; tick?: number }
  | { kind: "choose_decor"; decor: string; tick?: number }
  | { kind: "move_listener"; position: [number, number, number]; tick?: number }
  | { kind: "enter_ride"; object: string; tick?: number }
  | { kind: "bifurcate_tableau"; target: string; tick?: number };

export type ServerMessage =
  | { type: "hello"; hello: Hello }
  | { type: "error"; error: string }
  | { type: "snapshot"; snapshot: Snapshot };

export class ProtocolError extends Error {}

function isObject(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

export function parseServerMessage(line: string): ServerMessage {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch {
    throw new ProtocolError(`server sent a non-JSON line: ${line.slice(0, 80)}`);
  }
  if (!isObject(obj)) {
    throw new ProtocolError("server message is not an object");
  }
  if ("hello" in obj && isObject(obj.hello)) {
    return { type: "hello", hello: obj.hello as unknown as Hello };
  }
  if ("error" in obj && typeof obj.error === "string") {
    return { type: "error", error: obj.error };
  }
  if (
    typeof obj.tick === "number" &&
    isObject(obj.characters) &&
    isObject(obj.scene)
  ) {
    return { type: "snapshot", snapshot: obj as unknown as Snapshot };
  }
  throw new ProtocolError("server message matches no known shape");
}

/** One canonical line, newline included, ready for the socket. */
export function encodeEvent(event: UserEvent): string {
  return JSON.stringify(event) + "\n";
}

/** Stable identity used for per-tick send throttling. */
export function throttleKey(event: UserEvent): string {
  switch (event.kind) {
    case "relaunch_character":
    case "drag_character":
      return `${event.kind}:${event.character}`;
    default:
      return event.kind;
  }
}
