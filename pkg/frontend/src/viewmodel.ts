/**
 * Client state: the latest server-confirmed snapshot plus connection
 * bookkeeping.  There is deliberately no simulation here — every rendered
 * value originates in a snapshot, so reloading the page and re-attaching
 * reproduces the identical view from the next snapshot onward.
 */

import {
  CharacterId,
  Hello,
  ProtocolError,
  ServerMessage,
  Snapshot,
  UserEvent,
  encodeEvent,
  parseServerMessage,
  throttleKey,
} from "./protocol.js";
import { Transport } from "./transport.js";

export type ConnectionState = "connecting" | "connected" | "disconnected";

const PULSE_MS = 600;

export class ViewModel {
  hello: Hello | null = null;
  latest: Snapshot | null = null;
  previous: Snapshot | null = null;
  connection: ConnectionState = "connecting";
  banner: string | null = null;
  lastServerError: string | null = null;
  /** character -> wall-clock ms until which the ack pulse shows */
  pulses = new Map<CharacterId, number>();

  private queued: UserEvent[] = [];
  private sentThisPeriod = new Set<string>();
  private listeners: (() => void)[] = [];

  constructor(
    private transport: Transport,
    private now: () => number = () => Date.now(),
  ) {
    transport.onOpen(() => {
      this.connection = "connected";
      this.banner = null;
      this.flushQueue();
      this.notify();
    });
    transport.onLine((line) => this.handleLine(line));
    transport.onClose(() => {
      this.connection = "disconnected";
      this.banner = "connexion perdue — reconnectez pour continuer";
      this.notify();
    });
  }

  /** Subscribe to state changes (render loop hooks in here). */
  onChange(cb: () => void): void {
    this.listeners.push(cb);
  }

  private notify(): void {
    this.listeners.forEach((cb) => cb());
  }

  private handleLine(line: string): void {
    let msg: ServerMessage;
    try {
      msg = parseServerMessage(line);
    } catch (err) {
      if (err instanceof ProtocolError) {
        this.lastServerError = err.message;
        this.notify();
        return;
      }
      throw err;
    }
    if (msg.type === "hello") {
      this.hello = msg.hello;
    } else if (msg.type === "error") {
      this.lastServerError = msg.error;
    } else {
      this.ingestSnapshot(msg.snapshot);
    }
    this.notify();
  }

  private ingestSnapshot(snapshot: Snapshot): void {
    if (this.latest !== null && snapshot.tick < this.latest.tick) {
      return; // stale line after a resync; confirmed state only moves forward
    }
    this.previous = this.latest;
    this.latest = snapshot;
    this.sentThisPeriod.clear();
    for (const record of snapshot.events) {
      if (record.event.kind === "relaunch_character" && record.accepted) {
        const character = record.event["character"] as CharacterId;
        this.pulses.set(character, this.now() + PULSE_MS);
      }
    }
  }

  /** True while the ack pulse for a character is still visible. */
  pulseActive(character: CharacterId): boolean {
    const until = this.pulses.get(character);
    return until !== undefined && this.now() < until;
  }

  private send(event: UserEvent): boolean {
    if (this.connection !== "connected") {
      this.queued.push(event);
      this.banner = "hors ligne — commande en attente de reconnexion";
      this.notify();
      return false;
    }
    const key = throttleKey(event);
    if (this.sentThisPeriod.has(key)) {
      return false; // one command per kind per snapshot period
    }
    this.sentThisPeriod.add(key);
    this.transport.send(encodeEvent(event));
    return true;
  }

  private flushQueue(): void {
    const pending = this.queued;
    this.queued = [];
    for (const event of pending) {
      this.transport.send(encodeEvent(event));
    }
  }

  get queuedCount(): number {
    return this.queued.length;
  }

  // -- spectator commands --------------------------------------------------

  onCharacterClick(character: CharacterId): boolean {
    return this.send({ kind: "relaunch_character", character });
  }

  onDrag(character: CharacterId, position: [number, number]): boolean {
    return this.send({ kind: "drag_character", character, position });
  }

  onSlider(value: number): boolean {
    const clamped = Math.min(Math.max(value, 0), 1);
    return this.send({ kind: "set_lambda", value: clamped });
  }

  onDecor(decor: string): boolean {
    return this.send({ kind: "choose_decor", decor });
  }

  onMoveListener(position: [number, number, number]): boolean {
    return this.send({ kind: "move_listener", position });
  }

  onEnterRide(object: string): boolean {
    return this.send({ kind: "enter_ride", object });
  }

  onBifurcate(target: string): boolean {
    return this.send({ kind: "bifurcate_tableau", target });
  }

  close(): void {
    this.transport.close();
  }
}
