// Message shapes for the t34sim event API.
//
// The service pushes the same JSON object on the /stream socket as it
// returns inside the "steps" array of a POST /events response, so one set
// of types covers both.

export type LightColor = "RED" | "GREEN" | "OFF";

export type ButtonName =
  | "INFO"
  | "UP"
  | "DOWN"
  | "YES_START"
  | "NO_STOP"
  | "FF"
  | "BACK"
  | "ON_OFF";

export type PressKind = "SINGLE" | "LONG";

export type EventPayload =
  | { kind: "button"; button: ButtonName; press: PressKind }
  | { kind: "sensor"; id: string; value: number | string }
  | { kind: "timer"; id: string }
  | { kind: "power_cycle" };

// One message from the service. `event` is null exactly when the message
// is a snapshot (the opening frame of the stream, or GET /session); only
// snapshots carry the trailing status fields.
export type StreamMessage = {
  t: number;
  event: EventPayload | null;
  prev: string;
  curr: string;
  line1: string;
  line2: string;
  line3: string;
  light: LightColor;
  emphasis: number;
  log: string[];
  locked?: boolean;
  battery?: number;
  position?: number;
  supported_syringes?: number;
  mutations?: string[];
};

export type PostResponse = {
  t: number;
  steps: StreamMessage[];
};
