import { RunConsole } from "./console.js";
import { renderLaunchForm } from "./launch.js";

function mount(): void {
  const root = document.getElementById("app");
  if (!root) return;
  const params = new URLSearchParams(window.location.search);
  const runId = params.get("run");
  if (runId) {
    const console_ = new RunConsole(root, runId);
    console_.connect();
    return;
  }
  renderLaunchForm(root, (newRunId) => {
    const url = new URL(window.location.href);
    url.searchParams.set("run", newRunId);
    window.location.assign(url.toString());
  });
}

mount();
