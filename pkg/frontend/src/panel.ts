import type { EventPayload, LightColor, StreamMessage } from "./types.js";

// Everything the console shows. The displayed fields are copied verbatim
// from the last service message; the console adds no behaviour of its own.
export type PanelState = {
  t: number;
  stateName: string;
  lines: [string, string, string];
  light: LightColor;
  emphasis: number;
  battery: number;
  position: number;
  locked: boolean;
  supportedSyringes: number;
  log: string[];
  lastEvent: EventPayload | null;
};

export const LCD_COLUMNS = 15;

export function emptyPanel(): PanelState {
  return {
    t: 0,
    stateName: "OFF",
    lines: ["", "", ""],
    light: "OFF",
    emphasis: 0,
    battery: 0,
    position: 0,
    locked: false,
    supportedSyringes: 0,
    log: [],
    lastEvent: null,
  };
}

// Fold one message into the panel. Snapshots replace the log and refresh
// the status strip; steps append their log lines and mirror the sensor
// values the service echoed back (the only two the panel displays).
export function applyMessage(panel: PanelState, message: StreamMessage): PanelState {
  const next: PanelState = {
    ...panel,
    t: message.t,
    stateName: message.curr,
    lines: [message.line1, message.line2, message.line3],
    light: message.light,
    emphasis: message.emphasis,
    lastEvent: message.event,
  };
  if (message.event === null) {
    next.log = [...message.log];
    next.battery = message.battery ?? panel.battery;
    next.position = message.position ?? panel.position;
    next.locked = message.locked ?? panel.locked;
    next.supportedSyringes = message.supported_syringes ?? panel.supportedSyringes;
  } else {
    next.log = [...panel.log, ...message.log];
    if (message.event.kind === "sensor" && typeof message.event.value === "number") {
      if (message.event.id === "POSITION") next.position = message.event.value;
      if (message.event.id === "BATTERY") next.battery = message.event.value;
    }
  }
  return next;
}

export function foldMessages(messages: StreamMessage[]): PanelState {
  return messages.reduce(applyMessage, emptyPanel());
}

// Pad to the fixed LCD width so emphasis styling covers the whole row.
export function padLine(text: string): string {
  return text.padEnd(LCD_COLUMNS, " ");
}
