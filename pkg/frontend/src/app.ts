// DOM wiring for the search page; all behaviour lives in core.ts.

import { makeGatewayClient, SearchController, UiState } from "./core.js";

const gateway = makeGatewayClient("");

function element<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const input = element<HTMLInputElement>("search-input");
const suggestionList = element<HTMLUListElement>("suggestions");
const fileList = element<HTMLUListElement>("files");
const statusLine = element<HTMLElement>("status");
const hintLine = element<HTMLElement>("hint");
const selectedHeading = element<HTMLElement>("selected-keyword");

function render(state: UiState): void {
  hintLine.textContent = state.hint ?? "";
  statusLine.textContent =
    state.status === "loading" ? "searching…" : state.status === "error" ? `error: ${state.errorMessage}` : "";

  suggestionList.replaceChildren(
    ...state.suggestions.map((keyword) => {
      const item = document.createElement("li");
      const button = document.createElement("button");
      button.type = "button";
      button.textContent = keyword;
      button.classList.toggle("selected", keyword === state.selectedKeyword);
      button.addEventListener("click", () => controller.onSelect(keyword));
      item.appendChild(button);
      return item;
    }),
  );
  if (state.input && !state.suggestions.length && state.status === "idle" && !state.hint) {
    const item = document.createElement("li");
    item.className = "empty";
    item.textContent = "no matching keywords";
    suggestionList.appendChild(item);
  }

  selectedHeading.textContent = state.selectedKeyword ? `files for "${state.selectedKeyword}"` : "";
  fileList.replaceChildren(
    ...state.fileIds.map((id) => {
      const item = document.createElement("li");
      const link = document.createElement("a");
      link.href = gateway.fileUrl(id);
      link.textContent = id;
      link.setAttribute("download", "");
      item.appendChild(link);
      return item;
    }),
  );
  if (state.selectedKeyword && !state.fileIds.length && state.status === "idle") {
    const item = document.createElement("li");
    item.className = "empty";
    item.textContent = "no files";
    fileList.appendChild(item);
  }
}

const controller = new SearchController({ gateway, onChange: render });

input.addEventListener("input", () => controller.onInput(input.value));
