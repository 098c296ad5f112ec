import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { GatewayClient, SearchController, UiState, makeGatewayClient } from "../src/core.js";

interface Deferred<T> {
  promise: Promise<T>;
  resolve: (value: T) => void;
  reject: (err: unknown) => void;
}

function deferred<T>(): Deferred<T> {
  let resolve!: (value: T) => void;
  let reject!: (err: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

class FakeGateway implements GatewayClient {
  suggestCalls: string[] = [];
  filesCalls: string[] = [];
  pendingSuggest: Deferred<string[]>[] = [];
  pendingFiles: Deferred<string[]>[] = [];

  suggest(substring: string): Promise<string[]> {
    this.suggestCalls.push(substring);
    const d = deferred<string[]>();
    this.pendingSuggest.push(d);
    return d.promise;
  }

  filesFor(keyword: string): Promise<string[]> {
    this.filesCalls.push(keyword);
    const d = deferred<string[]>();
    this.pendingFiles.push(d);
    return d.promise;
  }

  fileUrl(id: string): string {
    return `/file/${encodeURIComponent(id)}`;
  }
}

function setup(debounceMs = 250) {
  const gateway = new FakeGateway();
  const states: UiState[] = [];
  const controller = new SearchController({
    gateway,
    debounceMs,
    onChange: (state) => states.push(state),
  });
  return { gateway, states, controller };
}

const flush = () => Promise.resolve().then(() => Promise.resolve());

describe("debounced suggestions", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("coalesces rapid keystrokes into one request for the final text", async () => {
    const { gateway, controller } = setup();
    controller.onInput("a");
    vi.advanceTimersByTime(100);
    controller.onInput("ab");
    vi.advanceTimersByTime(249);
    expect(gateway.suggestCalls).toEqual([]);
    vi.advanceTimersByTime(1);
    expect(gateway.suggestCalls).toEqual(["ab"]);
  });

  it("renders the response for the current input", async () => {
    const { gateway, states, controller } = setup();
    controller.onInput("ab");
    vi.advanceTimersByTime(250);
    gateway.pendingSuggest[0].resolve(["aba", "bbab"]);
    await flush();
    const last = states[states.length - 1];
    expect(last.suggestions).toEqual(["aba", "bbab"]);
    expect(last.status).toBe("idle");
  });

  it("drops a stale response that resolves after a newer request", async () => {
    const { gateway, states, controller } = setup();
    controller.onInput("a");
    vi.advanceTimersByTime(250);
    controller.onInput("ab");
    vi.advanceTimersByTime(250);
    expect(gateway.suggestCalls).toEqual(["a", "ab"]);
    gateway.pendingSuggest[1].resolve(["aba", "bbab"]);
    await flush();
    gateway.pendingSuggest[0].resolve(["stale", "suggestions"]);
    await flush();
    const last = states[states.length - 1];
    expect(last.suggestions).toEqual(["aba", "bbab"]);
  });

  it("ignores an in-flight response after the input was cleared", async () => {
    const { gateway, states, controller } = setup();
    controller.onInput("ab");
    vi.advanceTimersByTime(250);
    controller.onInput("");
    gateway.pendingSuggest[0].resolve(["aba"]);
    await flush();
    const last = states[states.length - 1];
    expect(last.suggestions).toEqual([]);
    expect(last.status).toBe("idle");
    expect(gateway.suggestCalls).toEqual(["ab"]);
  });

  it("shows a hint instead of querying when the input contains '#'", () => {
    const { gateway, states, controller } = setup();
    controller.onInput("a#b");
    vi.advanceTimersByTime(1000);
    expect(gateway.suggestCalls).toEqual([]);
    const last = states[states.length - 1];
    expect(last.hint).toMatch(/#/);
    expect(last.suggestions).toEqual([]);
  });

  it("surfaces gateway errors and preserves the input", async () => {
    const { gateway, states, controller } = setup();
    controller.onInput("ab");
    vi.advanceTimersByTime(250);
    gateway.pendingSuggest[0].reject(new Error("boom"));
    await flush();
    const last = states[states.length - 1];
    expect(last.status).toBe("error");
    expect(last.errorMessage).toMatch(/boom/);
    expect(last.input).toBe("ab");
  });
});

describe("keyword selection", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  async function withSuggestions() {
    const rig = setup();
    rig.controller.onInput("ab");
    vi.advanceTimersByTime(250);
    rig.gateway.pendingSuggest[0].resolve(["aba", "bbab"]);
    await flush();
    return rig;
  }

  it("lists files for a selected suggestion", async () => {
    const { gateway, states, controller } = await withSuggestions();
    controller.onSelect("aba");
    expect(gateway.filesCalls).toEqual(["aba"]);
    gateway.pendingFiles[0].resolve(["f3"]);
    await flush();
    const last = states[states.length - 1];
    expect(last.selectedKeyword).toBe("aba");
    expect(last.fileIds).toEqual(["f3"]);
  });

  it("shows the empty state for a keyword with no files", async () => {
    const { gateway, states, controller } = await withSuggestions();
    controller.onSelect("bbab");
    gateway.pendingFiles[0].resolve([]);
    await flush();
    const last = states[states.length - 1];
    expect(last.fileIds).toEqual([]);
    expect(last.status).toBe("idle");
  });

  it("ignores selections that are not in the current suggestions", async () => {
    const { gateway, controller } = await withSuggestions();
    controller.onSelect("zzz");
    expect(gateway.filesCalls).toEqual([]);
  });
});

describe("gateway contract", () => {
  it("talks only to the gateway's plaintext endpoints", async () => {
    const urls: string[] = [];
    const fetchStub = async (url: string) => {
      urls.push(url);
      return {
        ok: true,
        status: 200,
        json: async () =>
          url.includes("/suggest") ? { suggestions: ["aba"] } : { ids: ["f1"] },
      };
    };
    const gateway = makeGatewayClient("http://gw", fetchStub);
    expect(await gateway.suggest("ab")).toEqual(["aba"]);
    expect(await gateway.filesFor("aba")).toEqual(["f1"]);
    expect(gateway.fileUrl("f1")).toBe("http://gw/file/f1");
    expect(urls).toEqual(["http://gw/suggest?s=ab", "http://gw/files?w=aba"]);
  });

  it("maps gateway error documents onto typed errors", async () => {
    const fetchStub = async () => ({
      ok: false,
      status: 400,
      json: async () => ({ error: "SeparatorInQueryError", detail: "no #" }),
    });
    const gateway = makeGatewayClient("", fetchStub);
    await expect(gateway.suggest("a#")).rejects.toMatchObject({
      code: "SeparatorInQueryError",
    });
  });
});

describe("latency budget", () => {
  it("renders suggestions well within 500ms of the last keystroke", async () => {
    const gateway: GatewayClient = {
      suggest: (s) =>
        new Promise((resolve) => setTimeout(() => resolve(["aba", "bbab"]), 50)),
      filesFor: async () => [],
      fileUrl: (id) => `/file/${id}`,
    };
    let rendered: UiState | null = null;
    const controller = new SearchController({
      gateway,
      onChange: (state) => {
        if (state.suggestions.length) rendered = state;
      },
    });
    const started = Date.now();
    controller.onInput("ab");
    while (!rendered && Date.now() - started < 1000) {
      await new Promise((resolve) => setTimeout(resolve, 10));
    }
    expect(rendered).not.toBeNull();
    expect(Date.now() - started).toBeLessThan(500);
    expect(rendered!.suggestions).toEqual(["aba", "bbab"]);
  });
});
