/** Line transports. The ViewModel only ever sees whole lines. */

export interface Transport {
  send(line: string): void;
  close(): void;
  onOpen(cb: () => void): void;
  onLine(cb: (line: string) => void): void;
  onClose(cb: () => void): void;
}

/** Splits a byte/string stream into newline-terminated lines. */
export class LineAssembler {
  private buffer = "";

  push(chunk: string, emit: (line: string) => void): void {
    this.buffer += chunk;
    let index: number;
    while ((index = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, index);
      this.buffer = this.buffer.slice(index + 1);
      if (line.trim().length > 0) {
        emit(line);
      }
    }
  }
}

/**
 * Browser transport over a WebSocket bridge (see bridge.mjs), which pipes
 * frames to the session server's TCP socket unchanged.
 */
export class WebSocketTransport implements Transport {
  private socket: WebSocket;
  private assembler = new LineAssembler();
  private openCbs: (() => void)[] = [];
  private lineCbs: ((line: string) => void)[] = [];
  private closeCbs: (() => void)[] = [];

  constructor(url: string) {
    this.socket = new WebSocket(url);
    this.socket.onopen = () => this.openCbs.forEach((cb) => cb());
    this.socket.onclose = () => this.closeCbs.forEach((cb) => cb());
    this.socket.onerror = () => this.closeCbs.forEach((cb) => cb());
    this.socket.onmessage = (msg) => {
      this.assembler.push(String(msg.data), (line) =>
        this.lineCbs.forEach((cb) => cb(line)),
      );
    };
  }

  send(line: string): void {
    this.socket.send(line);
  }

  close(): void {
    this.socket.close();
  }

  onOpen(cb: () => void): void {
    this.openCbs.push(cb);
  }

  onLine(cb: (line: string) => void): void {
    this.lineCbs.push(cb);
  }

  onClose(cb: () => void): void {
    this.closeCbs.push(cb);
  }
}
