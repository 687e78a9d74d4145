import { connectStream, createApi } from "./api.js";
import { applyMessage, emptyPanel, padLine } from "./panel.js";
import type { PanelState } from "./panel.js";
import type { ButtonName, EventPayload } from "./types.js";

// Hold a key at least this long to send a LONG press instead of a SINGLE.
const LONG_PRESS_MS = 600;

const base =
  new URLSearchParams(window.location.search).get("api") ?? "http://127.0.0.1:8000";
const api = createApi(base);

let panel = emptyPanel();

function byId<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function setStatus(message: string) {
  byId("status").textContent = message;
}

function render(current: PanelState) {
  const lines = [byId("lcd-line1"), byId("lcd-line2"), byId("lcd-line3")];
  lines.forEach((el, i) => {
    el.textContent = padLine(current.lines[i]);
    el.classList.toggle("primary", current.emphasis === i + 1);
  });
  byId("led").className = current.light.toLowerCase();
  byId("state-name").textContent = current.stateName;
  byId("clock").textContent = String(current.t);
  byId("battery").textContent = String(current.battery);
  byId("lock").textContent = current.locked ? "locked" : "unlocked";
  byId("syringe-count").textContent = String(current.supportedSyringes);
  byId<HTMLDivElement>("plunger-fill").style.width = `${current.position}%`;
  const log = byId("event-log");
  log.textContent = current.log.slice(-200).join("\n");
  log.scrollTop = log.scrollHeight;
}

// Rendering happens from the stream echo, never from the POST response,
// so the screen cannot drift from what the service pushed.
function post(event: EventPayload) {
  api.send(event).catch((err) => setStatus(String(err)));
}

function wireKey(el: HTMLButtonElement) {
  const name = el.dataset.key as ButtonName;
  let downAt = 0;
  el.onpointerdown = () => {
    downAt = Date.now();
  };
  el.onpointerup = () => {
    const press = Date.now() - downAt >= LONG_PRESS_MS ? "LONG" : "SINGLE";
    post({ kind: "button", button: name, press });
  };
}

function wireRig() {
  for (const id of ["CLAMP", "PLUNGER", "FLANGE"]) {
    const box = byId<HTMLInputElement>(`sensor-${id}`);
    box.onchange = () => post({ kind: "sensor", id, value: box.checked ? 1 : 0 });
  }
  const diameter = byId<HTMLSelectElement>("diameter");
  diameter.onchange = () =>
    post({ kind: "sensor", id: "DIAMETER", value: diameter.value });
  const position = byId<HTMLInputElement>("position");
  position.onchange = () => {
    byId("position-value").textContent = position.value;
    post({ kind: "sensor", id: "POSITION", value: Number(position.value) });
  };
  byId<HTMLButtonElement>("advance").onclick = () => {
    const seconds = Number(byId<HTMLInputElement>("advance-seconds").value);
    api.advance(seconds).catch((err) => setStatus(String(err)));
  };
}

document.querySelectorAll<HTMLButtonElement>("button.key").forEach(wireKey);
wireRig();
render(panel);

connectStream(base, (message) => {
  panel = applyMessage(panel, message);
  setStatus(`connected to ${base}`);
  render(panel);
});
