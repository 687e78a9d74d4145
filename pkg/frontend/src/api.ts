import type { EventPayload, PostResponse, StreamMessage } from "./types.js";

// Minimal constructor surface shared by the browser WebSocket and the ws
// package, so the stream helper can run headless in tests.
export type SocketCtor = new (url: string) => {
  onopen: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  close(): void;
};

// Client for the three service endpoints. `base` is the http origin of the
// running service, e.g. "http://127.0.0.1:8000".
export function createApi(base: string) {
  const root = base.replace(/\/$/, "");

  async function getJson(path: string): Promise<unknown> {
    const res = await fetch(root + path);
    if (!res.ok) throw new Error(`GET ${path} failed: ${res.status}`);
    return res.json();
  }

  async function postJson(path: string, body: unknown): Promise<unknown> {
    const res = await fetch(root + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) throw new Error(`POST ${path} failed: ${res.status}`);
    return res.json();
  }

  return {
    session(): Promise<StreamMessage> {
      return getJson("/session") as Promise<StreamMessage>;
    },
    send(event: EventPayload): Promise<PostResponse> {
      return postJson("/events", event) as Promise<PostResponse>;
    },
    advance(seconds: number): Promise<PostResponse> {
      return postJson("/events", { kind: "advance", seconds }) as Promise<PostResponse>;
    },
  };
}

export type Api = ReturnType<typeof createApi>;

// Open the push stream and hand every JSON frame to `onMessage` (the first
// frame is a snapshot). Reconnects with capped backoff until the returned
// cleanup function is called.
export function connectStream(
  base: string,
  onMessage: (message: StreamMessage) => void,
  Socket: SocketCtor = (globalThis as { WebSocket?: SocketCtor }).WebSocket!,
): () => void {
  const url = base.replace(/^http/, "ws").replace(/\/$/, "") + "/stream";

  let socket: InstanceType<SocketCtor> | null = null;
  let closed = false;
  let retryMs = 1000;

  const open = () => {
    socket = new Socket(url);

    socket.onopen = () => {
      retryMs = 1000;
    };

    socket.onmessage = (ev) => {
      try {
        onMessage(JSON.parse(String(ev.data)));
      } catch {
        // ignore anything that is not a JSON frame
      }
    };

    socket.onclose = () => {
      if (!closed) {
        setTimeout(open, retryMs);
        retryMs = Math.min(retryMs * 2, 8000);
      }
    };

    socket.onerror = () => {
      // onclose handles the retry
    };
  };

  open();

  return () => {
    closed = true;
    socket?.close();
  };
}
