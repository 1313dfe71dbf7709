import init, { KitchenDemo } from "./pkg/tasklearn_wasm.js";

const $ = (id) => document.getElementById(id);

function line(cls, text) {
  const p = document.createElement("p");
  p.className = cls;
  p.textContent = text;
  $("log").append(p);
  $("log").scrollTop = $("log").scrollHeight;
}

function showEvent(e) {
  switch (e.type) {
    case "user_message": return line("user", "> " + e.text);
    case "agent_message": return line("agent", e.text);
    case "action_learned": return line("note", `learned ${e.name}(${e.params.join(", ")})`);
    case "milestone": return line("note", `milestone: ${e.name}`);
    case "undo_applied": return line("note", e.restored ? "undone" : "nothing to undo");
    case "error": return line("error", e.message);
  }
}

function render(reply) {
  const { events, state } = JSON.parse(reply);
  events.forEach(showEvent);
  $("knowledge").replaceChildren(...state.knowledge.map((k) => {
    const li = document.createElement("li");
    li.textContent = `${k.name}(${k.params.join(", ")})`;
    return li;
  }));
  $("grid").textContent = state.world.join("\n");
  $("status").textContent = `holding: ${state.holding}, tick ${state.tick}`;
  $("milestones").replaceChildren(...state.milestones.map((m) => {
    const li = document.createElement("li");
    li.textContent = m;
    return li;
  }));
  const pending = state.pending;
  $("pending").style.display = pending ? "block" : "none";
  if (pending) {
    const options = pending.options.length ? ` [${pending.options.join(", ")}]` : "";
    $("question").textContent = pending.question + options;
  }
}

function attempt(f) {
  try {
    render(f());
  } catch (err) {
    line("error", String(err));
  }
}

await init();
const demo = new KitchenDemo(true);
render(demo.state());

$("say").addEventListener("submit", (ev) => {
  ev.preventDefault();
  const text = $("message").value.trim();
  if (!text) return;
  $("message").value = "";
  attempt(() => demo.say(text));
});
$("approve").addEventListener("click", () => attempt(() => demo.approve()));
$("confirm").addEventListener("submit", (ev) => {
  ev.preventDefault();
  const value = $("correction").value;
  $("correction").value = "";
  attempt(() => demo.correct(value));
});
$("undo").addEventListener("click", () => attempt(() => demo.undo()));
