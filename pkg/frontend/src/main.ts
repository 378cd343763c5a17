// Browser entry point: wires the tap pad to the tracking service and
// paints whatever comes back. Everything interesting lives in session.ts;
// this file is DOM and WebSocket plumbing only.

import { UiSession } from "./session.js";
import type { ViewState } from "./view.js";

const $ = <T extends HTMLElement>(id: string) =>
  document.getElementById(id) as T;

const bpmEl = $("bpm");
const meterEl = $("meter");
const clarityEl = $<HTMLDivElement>("clarity-fill");
const phaseEl = $<HTMLDivElement>("phase-fill");
const statusEl = $("status");
const padEl = $("pad");
const readout = $("readout");
const clickToggle = $<HTMLInputElement>("click-toggle");

let audio: AudioContext | null = null;

function click() {
  if (!clickToggle.checked) return;
  audio = audio ?? new AudioContext();
  const osc = audio.createOscillator();
  const gain = audio.createGain();
  osc.frequency.value = 880;
  gain.gain.value = 0.4;
  osc.connect(gain).connect(audio.destination);
  osc.start();
  osc.stop(audio.currentTime + 0.04);
}

function paint(view: ViewState) {
  readout.classList.toggle("dimmed", view.kind === "estimate" && view.dimmed);
  switch (view.kind) {
    case "estimate":
      bpmEl.textContent = view.bpmText;
      meterEl.textContent = view.meterBadge;
      clarityEl.style.width = `${view.clarityPct}%`;
      phaseEl.style.width = `${view.phasePct}%`;
      statusEl.textContent = `${view.noteCount} notes in window`;
      break;
    case "listening":
      statusEl.textContent = "listening…";
      break;
    case "status":
      statusEl.textContent = view.text;
      break;
    case "error":
      statusEl.textContent = view.message;
      break;
    case "idle":
      statusEl.textContent = "connecting…";
      break;
  }
}

function flash() {
  click();
  padEl.classList.add("flash");
  setTimeout(() => padEl.classList.remove("flash"), 120);
}

const url = `ws://${location.hostname || "127.0.0.1"}:8765`;
let session: UiSession;

function connect() {
  const socket = new WebSocket(url);
  session = new UiSession({
    send: (line) => socket.send(line),
    onRender: paint,
    onFlash: flash,
  });
  session.connecting();
  paint({ kind: "idle" });

  socket.onopen = () => session.opened();
  socket.onmessage = (msg) => session.handleLine(String(msg.data));
  socket.onclose = () => {
    session.disconnected();
    statusEl.textContent = "disconnected, retrying…";
    setTimeout(connect, 1000);
  };
}

padEl.addEventListener("pointerdown", () => session.tap("pointer"));
document.addEventListener("keydown", (e) => {
  if (e.repeat) return;
  if (e.key === " " || e.key === "j") session.tap("key-hard");
  else if (e.key === "f") session.tap("key-soft");
});

connect();
