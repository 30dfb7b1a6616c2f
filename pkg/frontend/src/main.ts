/** Browser entry point: ?server=host:port overrides the backend. */

import { Panel } from "./panel.js";
import { PanelSocket } from "./socket.js";
import { applyAck, applyState, initialState } from "./state.js";

function serverBase(): string {
  const override = new URLSearchParams(window.location.search).get("server");
  return override ?? window.location.host;
}

function main(): void {
  const root = document.getElementById("panel");
  if (root === null) {
    throw new Error("missing #panel element");
  }
  const base = serverBase();
  const state = initialState();
  const socket = new PanelSocket(
    `ws://${base}/ws`,
    {
      onMessage: (msg) => {
        if (msg.type === "state") {
          applyState(state, msg, Date.now());
        } else if (msg.type === "ack") {
          applyAck(state, msg);
        } else {
          state.toasts.push(`server error: ${msg.reason}`);
        }
      },
      onStatus: (status) => {
        state.connection = status;
      },
      onProtocolError: (err) => {
        state.toasts.push(err.message);
      },
    },
    (url) => new WebSocket(url) as unknown as import("./socket.js").WireSocket,
  );
  const panel = new Panel(root, state, socket);

  fetch(`http://${base}/api/scenario`)
    .then((response) => response.json())
    .then((doc: { fsm?: { states?: { name: string }[] } }) => {
      const states = doc.fsm?.states ?? [];
      panel.setStateNames(states.map((s) => s.name));
    })
    .catch(() => {
      /* transition buttons appear once the scenario loads */
    });

  socket.connect();
  const render = () => {
    panel.render();
    window.requestAnimationFrame(render);
  };
  render();
}

main();
