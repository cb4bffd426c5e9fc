/** Record detail panel: the display-document lines plus the raw-XML link. */

import type { RecordResponse } from "./types.js";

export function renderRecordPanel(
  container: HTMLElement,
  record: RecordResponse,
  onClose: () => void,
): void {
  container.textContent = "";
  container.hidden = false;

  const close = document.createElement("button");
  close.className = "record__close";
  close.textContent = "Close";
  close.addEventListener("click", () => {
    container.hidden = true;
    onClose();
  });
  container.appendChild(close);

  const heading = document.createElement("h2");
  heading.textContent = `${record.archive}:${record.id}`;
  container.appendChild(heading);

  const list = document.createElement("dl");
  list.className = "record__lines";
  for (const line of record.display) {
    const label = document.createElement("dt");
    label.textContent = line.label;
    const text = document.createElement("dd");
    text.textContent = line.text;
    list.appendChild(label);
    list.appendChild(text);
  }
  container.appendChild(list);

  const xml = document.createElement("a");
  xml.className = "record__xml";
  xml.href = record.xml;
  xml.textContent = "Raw XML";
  container.appendChild(xml);
}

export function renderRecordError(container: HTMLElement, message: string): void {
  container.textContent = "";
  container.hidden = false;
  const note = document.createElement("p");
  note.className = "record__error";
  note.textContent = message;
  container.appendChild(note);
}
