/**
 * Minimal browser shell: renders a task as blurred token spans, feeds pointer
 * and edit gestures to the EditorCore, and streams the emitted events to the
 * study service through a SessionUplink. This file is the only DOM-dependent
 * module; everything it wires together is headless and unit-tested.
 */

import { SessionUplink, StudyClient, TaskDoc, ApiError } from "./api.js";
import { RealClock } from "./clock.js";
import { EditorCore } from "./editor.js";
import { SessionEvent } from "./timeline.js";

export interface ShellOptions {
  baseUrl: string;
  participantId: string;
  root: HTMLElement;
  /** force a specific snippet instead of the first one with no session yet */
  snippetId?: string;
  flushIntervalMs?: number;
}

export async function mountStudyShell(opts: ShellOptions): Promise<void> {
  const client = new StudyClient(opts.baseUrl);
  await client.register(opts.participantId);
  const { tasks } = await client.tasks(opts.participantId);
  if (tasks.length === 0) {
    opts.root.textContent = "no tasks assigned";
    return;
  }

  const { task, token } = await openFirstAvailable(client, opts, tasks);
  const uplink = new SessionUplink(client, token);
  const clock = new RealClock();

  const ui = buildDom(opts.root, task);
  const editor = new EditorCore(task, clock, (ev: SessionEvent) => {
    uplink.enqueue(ev);
    if (ev.kind === "edit") {
      renderLine(ui, editor, task.buggy_line);
    }
    paintBlur(ui, editor);
  });

  for (let line = 1; line <= editor.snippet.lines.length; line += 1) {
    renderLine(ui, editor, line);
  }
  paintBlur(ui, editor);

  ui.code.addEventListener("mousemove", (ev: MouseEvent) => {
    const span = (ev.target as Element | null)?.closest?.("span.tok");
    if (!(span instanceof HTMLElement)) return;
    const line = Number(span.dataset.line);
    const col = Number(span.dataset.colStart);
    editor.moveCursor(line, col, "pointer");
  });

  ui.applyBtn.addEventListener("click", () => {
    const accepted = editor.applyEdit(task.buggy_line, ui.editInput.value);
    ui.status.textContent = accepted
      ? `line ${task.buggy_line} updated`
      : "edit rejected (only the marked line may change)";
  });

  const ticker = setInterval(() => {
    uplink.flush().catch((err) => {
      ui.status.textContent = describeError(err);
    });
  }, opts.flushIntervalMs ?? 1000);

  const close = async (label: "fix_done" | "cannot_fix") => {
    clearInterval(ticker);
    ui.doneBtn.disabled = true;
    ui.giveUpBtn.disabled = true;
    try {
      const record = await uplink.submit(editor.submission(label));
      ui.status.textContent = `submitted: ${JSON.stringify(record["label"])}`;
    } catch (err) {
      ui.status.textContent = describeError(err);
      ui.doneBtn.disabled = false;
      ui.giveUpBtn.disabled = false;
    }
  };
  ui.doneBtn.addEventListener("click", () => void close("fix_done"));
  ui.giveUpBtn.addEventListener("click", () => void close("cannot_fix"));

  ui.status.textContent = `session ${token} open — ${task.description}`;
}

async function openFirstAvailable(
  client: StudyClient,
  opts: ShellOptions,
  tasks: TaskDoc[],
): Promise<{ task: TaskDoc; token: string }> {
  const candidates = opts.snippetId
    ? tasks.filter((t) => t.snippet_id === opts.snippetId)
    : tasks;
  let lastErr: unknown = new Error("no matching task");
  for (const task of candidates) {
    try {
      const opened = await client.openSession(opts.participantId, task.snippet_id);
      return { task, token: opened.token };
    } catch (err) {
      if (err instanceof ApiError && err.errorName === "DuplicateSession") {
        lastErr = err;
        continue; // already done this one; try the next assignment
      }
      throw err;
    }
  }
  throw lastErr;
}

interface ShellDom {
  code: HTMLElement;
  lineHosts: Map<number, HTMLElement>;
  editInput: HTMLInputElement;
  applyBtn: HTMLButtonElement;
  doneBtn: HTMLButtonElement;
  giveUpBtn: HTMLButtonElement;
  status: HTMLElement;
}

function buildDom(root: HTMLElement, task: TaskDoc): ShellDom {
  root.textContent = "";
  const doc = root.ownerDocument;

  const code = doc.createElement("pre");
  code.className = "code";
  const lineHosts = new Map<number, HTMLElement>();
  const lineCount = task.source.split("\n").length;
  for (let line = 1; line <= lineCount; line += 1) {
    const host = doc.createElement("div");
    host.className = line === task.buggy_line ? "line buggy" : "line";
    host.dataset.line = String(line);
    code.appendChild(host);
    lineHosts.set(line, host);
  }
  root.appendChild(code);

  const controls = doc.createElement("div");
  controls.id = "controls";
  const editInput = doc.createElement("input");
  editInput.id = "buggy-input";
  editInput.spellcheck = false;
  const applyBtn = doc.createElement("button");
  applyBtn.textContent = `replace line ${task.buggy_line}`;
  const doneBtn = doc.createElement("button");
  doneBtn.textContent = "submit fix";
  const giveUpBtn = doc.createElement("button");
  giveUpBtn.textContent = "cannot fix";
  controls.append(editInput, applyBtn, doneBtn, giveUpBtn);
  root.appendChild(controls);

  const status = doc.createElement("div");
  status.id = "status";
  root.appendChild(status);

  return { code, lineHosts, editInput, applyBtn, doneBtn, giveUpBtn, status };
}

/** Rebuild one line as text gaps plus token spans tagged with their origin. */
function renderLine(ui: ShellDom, editor: EditorCore, line: number): void {
  const host = ui.lineHosts.get(line);
  if (!host) return;
  const doc = host.ownerDocument;
  const text = editor.lineText(line);
  const tokens = editor.displayTokens(line);
  const originals = editor.displayOriginals(line);
  host.textContent = "";
  let col = 0;
  tokens.forEach((tok, i) => {
    if (tok.colStart > col) {
      host.appendChild(doc.createTextNode(text.slice(col, tok.colStart)));
    }
    const span = doc.createElement("span");
    span.className = "tok";
    span.textContent = tok.text;
    span.dataset.line = String(line);
    span.dataset.colStart = String(tok.colStart);
    const orig = originals[i];
    if (orig !== null) {
      span.dataset.index = String(orig);
    }
    host.appendChild(span);
    col = tok.colEnd;
  });
  if (col < text.length) {
    host.appendChild(doc.createTextNode(text.slice(col)));
  }
  if (line === editor.snippet.buggyLine) {
    ui.editInput.value = text;
  }
}

/** Apply the current blur mask to every token span. */
function paintBlur(ui: ShellDom, editor: EditorCore): void {
  const mask = editor.blurMask();
  const focus = editor.currentFocus();
  for (const span of ui.code.querySelectorAll<HTMLElement>("span.tok")) {
    const idx = span.dataset.index;
    const visible = idx !== undefined && mask.has(Number(idx));
    span.classList.toggle("blurred", !visible);
    span.classList.toggle("focused", visible && Number(idx) === focus);
  }
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    return `${err.errorName}: ${err.message}`;
  }
  return String(err);
}
