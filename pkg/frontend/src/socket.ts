/** Reconnecting WebSocket client for the command/telemetry channel.
 *
 * The socket is the panel's only asynchrony source. The constructor
 * takes an injectable socket factory so tests can drive the client with
 * a fake transport; the browser entry point passes the native WebSocket.
 */

import { Command, ProtocolError, ServerMessage, decodeServer, encodeCommand } from "./protocol.js";

export interface WireSocket {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => WireSocket;

export interface ClientHandlers {
  onMessage(msg: ServerMessage): void;
  onStatus(status: "connecting" | "open" | "closed"): void;
  onProtocolError?(err: ProtocolError): void;
}

export class PanelSocket {
  private socket: WireSocket | null = null;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private closedByUser = false;
  private nextId = 0;
  readonly session = Math.random().toString(36).slice(2, 8);

  constructor(
    private readonly url: string,
    private readonly handlers: ClientHandlers,
    private readonly factory: SocketFactory,
    private readonly reconnectDelayMs = 1000,
  ) {}

  connect(): void {
    this.closedByUser = false;
    this.handlers.onStatus("connecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => this.handlers.onStatus("open");
    socket.onmessage = (event) => {
      let msg: ServerMessage;
      try {
        msg = decodeServer(event.data);
      } catch (err) {
        if (err instanceof ProtocolError && this.handlers.onProtocolError) {
          this.handlers.onProtocolError(err);
          return;
        }
        throw err;
      }
      this.handlers.onMessage(msg);
    };
    socket.onclose = () => {
      this.socket = null;
      this.handlers.onStatus("closed");
      if (!this.closedByUser) {
        this.reconnectTimer = setTimeout(() => {
          this.reconnectTimer = null;
          this.connect();
        }, this.reconnectDelayMs);
      }
    };
  }

  /** Send one command; returns its unique id, or null when offline. */
  send(cmd: Command): string | null {
    if (this.socket === null) {
      return null;
    }
    this.nextId += 1;
    const id = `${this.session}-${this.nextId}`;
    this.socket.send(encodeCommand(id, cmd));
    return id;
  }

  close(): void {
    this.closedByUser = true;
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    if (this.socket !== null) {
      this.socket.close();
      this.socket = null;
    }
  }
}
