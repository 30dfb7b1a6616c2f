/** DOM wiring: renders the dashboard from PanelState and maps every
 * user action to exactly one command on the socket. */

import { drawPlot } from "./plot.js";
import type { Command, StateMessage } from "./protocol.js";
import { PanelSocket } from "./socket.js";
import {
  Channel,
  PanelState,
  channelKey,
  expirePending,
  isStale,
  recordCommand,
  takeToasts,
  toggleChannel,
} from "./state.js";

const CHANNELS: Channel[] = ["q", "qd", "tau", "q_ref"];

export class Panel {
  private stateNames: string[] = [];
  private controlsBuilt = false;
  private readonly el: Record<string, HTMLElement> = {};

  constructor(
    private readonly root: HTMLElement,
    private readonly state: PanelState,
    private readonly socket: PanelSocket,
    private readonly now: () => number = () => Date.now(),
  ) {
    this.buildSkeleton();
  }

  setStateNames(names: string[]): void {
    this.stateNames = names;
  }

  private sendTracked(cmd: Command): string | null {
    const id = this.socket.send(cmd);
    if (id !== null) {
      recordCommand(this.state, id, cmd.kind, this.now());
    } else {
      this.state.toasts.push(`${cmd.kind} not sent: disconnected`);
    }
    return id;
  }

  private buildSkeleton(): void {
    this.root.innerHTML = "";
    const make = (tag: string, cls: string, parent: HTMLElement) => {
      const node = document.createElement(tag);
      node.className = cls;
      parent.appendChild(node);
      return node as HTMLElement;
    };
    this.el["banner"] = make("div", "banner", this.root);
    this.el["fsm"] = make("section", "fsm", this.root);
    this.el["controls"] = make("section", "controls", this.root);
    this.el["gains"] = make("section", "gains", this.root);
    this.el["perturb"] = make("section", "perturb", this.root);
    this.el["channels"] = make("section", "channels", this.root);
    const plotWrap = make("div", "plot-wrap", this.root);
    const canvas = document.createElement("canvas");
    canvas.width = 900;
    canvas.height = 320;
    plotWrap.appendChild(canvas);
    this.el["canvas"] = canvas;
    this.el["toasts"] = make("div", "toasts", this.root);
  }

  /** Re-render everything cheap; heavy sections build once from the
   * first telemetry frame. */
  render(): void {
    const now = this.now();
    expirePending(this.state, now);
    this.renderBanner(now);
    const latest = this.state.latest;
    if (latest !== null) {
      if (!this.controlsBuilt) {
        this.buildControls(latest);
        this.controlsBuilt = true;
      }
      this.renderFsm(latest);
      drawPlot(this.el["canvas"] as HTMLCanvasElement, this.state.buffers);
    }
    for (const toast of takeToasts(this.state)) {
      this.showToast(toast);
    }
  }

  private renderBanner(now: number): void {
    const banner = this.el["banner"] as HTMLElement;
    if (this.state.connection !== "open") {
      banner.textContent = `${this.state.connection}… (auto-reconnect)`;
      banner.dataset["status"] = "down";
    } else if (isStale(this.state, now)) {
      banner.textContent = "connected, telemetry stale (>1 s without data)";
      banner.dataset["status"] = "stale";
    } else {
      banner.textContent = "connected";
      banner.dataset["status"] = "ok";
    }
  }

  private renderFsm(msg: StateMessage): void {
    const section = this.el["fsm"] as HTMLElement;
    section.innerHTML = "";
    const label = document.createElement("span");
    label.className = "fsm-state";
    label.textContent = `FSM: ${msg.fsm.state}` +
      (msg.fsm.terminal ? " (terminal)" : ` — ${msg.fsm.elapsed.toFixed(2)} s`);
    section.appendChild(label);
    for (const name of this.stateNames) {
      const button = document.createElement("button");
      button.textContent = name;
      button.disabled = name === msg.fsm.state ||
        [...this.state.pending.values()].some((p) => p.kind === "transition");
      button.onclick = () => {
        this.sendTracked({ kind: "transition", state: name });
        button.disabled = true; // until the ack lands
        this.render();
      };
      section.appendChild(button);
    }
  }

  private buildControls(msg: StateMessage): void {
    const controls = this.el["controls"] as HTMLElement;
    controls.innerHTML = "";

    const speed = document.createElement("input");
    speed.type = "range";
    speed.min = "0";
    speed.max = "4";
    speed.step = "0.1";
    speed.value = String(msg.speed);
    speed.onchange = () =>
      this.sendTracked({ kind: "set_speed", factor: Number(speed.value) });
    const speedLabel = document.createElement("label");
    speedLabel.textContent = "speed ";
    speedLabel.appendChild(speed);
    controls.appendChild(speedLabel);

    const pause = document.createElement("button");
    pause.textContent = "pause/resume";
    pause.onclick = () => {
      const paused = this.state.latest ? this.state.latest.paused : false;
      this.sendTracked({ kind: "pause", paused: !paused });
    };
    controls.appendChild(pause);

    const step = document.createElement("button");
    step.textContent = "step ×1";
    step.onclick = () => this.sendTracked({ kind: "step_once", substeps: 1 });
    controls.appendChild(step);

    const reset = document.createElement("button");
    reset.textContent = "reset";
    reset.onclick = () => this.sendTracked({ kind: "reset" });
    controls.appendChild(reset);

    this.buildGains(msg);
    this.buildPerturbForm(msg);
    this.buildChannelToggles(msg);
  }

  private buildGains(msg: StateMessage): void {
    const section = this.el["gains"] as HTMLElement;
    section.innerHTML = "<h3>servo gains</h3>";
    for (const [joint, gains] of Object.entries(msg.gains)) {
      const row = document.createElement("div");
      const kp = document.createElement("input");
      kp.type = "range";
      kp.min = "0";
      kp.max = String(Math.max(1000, gains.kp * 2));
      kp.step = "1";
      kp.value = String(gains.kp);
      const kd = document.createElement("input");
      kd.type = "range";
      kd.min = "0";
      kd.max = String(Math.max(100, gains.kd * 2));
      kd.step = "0.5";
      kd.value = String(gains.kd);
      const send = () =>
        this.sendTracked({
          kind: "set_gains",
          joint,
          kp: Number(kp.value),
          kd: Number(kd.value),
        });
      kp.onchange = send;
      kd.onchange = send;
      const label = document.createElement("span");
      label.textContent = `${joint} kp/kd `;
      row.append(label, kp, kd);
      section.appendChild(row);
    }
  }

  private buildPerturbForm(msg: StateMessage): void {
    const section = this.el["perturb"] as HTMLElement;
    section.innerHTML = "<h3>perturbation</h3>";
    const target = document.createElement("select");
    for (const name of [
      ...Object.keys(msg.joints),
      ...Object.keys(msg.objects),
    ]) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      target.appendChild(option);
    }
    const magnitude = document.createElement("input");
    magnitude.type = "number";
    magnitude.value = "1.0";
    magnitude.step = "0.5";
    const duration = document.createElement("input");
    duration.type = "number";
    duration.value = "0.1";
    duration.step = "0.05";
    duration.min = "0";
    const apply = document.createElement("button");
    apply.textContent = "apply";
    apply.onclick = () =>
      this.sendTracked({
        kind: "perturb",
        target: target.value,
        magnitude: Number(magnitude.value),
        duration: Number(duration.value),
      });
    section.append(target, magnitude, duration, apply);
  }

  private buildChannelToggles(msg: StateMessage): void {
    const section = this.el["channels"] as HTMLElement;
    section.innerHTML = "<h3>plot channels</h3>";
    for (const joint of Object.keys(msg.joints)) {
      const row = document.createElement("div");
      const name = document.createElement("span");
      name.textContent = joint + " ";
      row.appendChild(name);
      for (const channel of CHANNELS) {
        const box = document.createElement("input");
        box.type = "checkbox";
        box.checked = this.state.channels.has(channelKey(joint, channel));
        box.onchange = () => toggleChannel(this.state, joint, channel);
        const label = document.createElement("label");
        label.append(box, channel);
        row.appendChild(label);
      }
      section.appendChild(row);
    }
  }

  private showToast(text: string): void {
    const toasts = this.el["toasts"] as HTMLElement;
    const node = document.createElement("div");
    node.className = "toast";
    node.textContent = text;
    toasts.appendChild(node);
    setTimeout(() => node.remove(), 6000);
  }
}
