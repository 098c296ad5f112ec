// Search page logic, kept free of DOM access so it can be tested head-on.
// The page talks exclusively to the local gateway's plaintext JSON API:
// GET /suggest?s=, GET /files?w=, GET /file/{id}. Keys, tokens and
// ciphertexts live on the other side of that boundary and never get here.

export interface GatewayClient {
  suggest(substring: string): Promise<string[]>;
  filesFor(keyword: string): Promise<string[]>;
  fileUrl(id: string): string;
}

export class GatewayError extends Error {
  constructor(
    public code: string,
    detail: string,
  ) {
    super(detail || code);
  }
}

type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

async function getJson(fetchFn: FetchLike, url: string): Promise<Record<string, unknown>> {
  let response;
  try {
    response = await fetchFn(url);
  } catch (err) {
    throw new GatewayError("GatewayUnreachable", String(err));
  }
  let doc: unknown = null;
  try {
    doc = await response.json();
  } catch {
    // non-JSON error body; fall through to the status check
  }
  const record = (doc ?? {}) as Record<string, unknown>;
  if (!response.ok) {
    throw new GatewayError(
      String(record["error"] ?? `HTTP ${response.status}`),
      String(record["detail"] ?? ""),
    );
  }
  return record;
}

export function makeGatewayClient(baseUrl = "", fetchFn?: FetchLike): GatewayClient {
  const doFetch: FetchLike = fetchFn ?? ((url) => fetch(url));
  return {
    async suggest(substring: string): Promise<string[]> {
      const doc = await getJson(doFetch, `${baseUrl}/suggest?s=${encodeURIComponent(substring)}`);
      return (doc["suggestions"] as string[]) ?? [];
    },
    async filesFor(keyword: string): Promise<string[]> {
      const doc = await getJson(doFetch, `${baseUrl}/files?w=${encodeURIComponent(keyword)}`);
      return (doc["ids"] as string[]) ?? [];
    },
    fileUrl(id: string): string {
      return `${baseUrl}/file/${encodeURIComponent(id)}`;
    },
  };
}

export type Status = "idle" | "loading" | "error";

export interface UiState {
  input: string;
  suggestions: string[];
  selectedKeyword: string | null;
  fileIds: string[];
  hint: string | null;
  status: Status;
  errorMessage: string | null;
}

export interface ControllerOptions {
  gateway: GatewayClient;
  onChange: (state: UiState) => void;
  debounceMs?: number;
  setTimer?: (fn: () => void, ms: number) => unknown;
  clearTimer?: (handle: unknown) => void;
}

const SEPARATOR_HINT = "'#' is reserved and cannot appear in a search";

// Debounced two-phase search driver. Every suggest request carries a
// sequence number; responses for anything but the newest request are
// dropped, so rapid typing can never render stale suggestions.
export class SearchController {
  private state: UiState = {
    input: "",
    suggestions: [],
    selectedKeyword: null,
    fileIds: [],
    hint: null,
    status: "idle",
    errorMessage: null,
  };
  private readonly gateway: GatewayClient;
  private readonly onChange: (state: UiState) => void;
  private readonly debounceMs: number;
  private readonly setTimer: (fn: () => void, ms: number) => unknown;
  private readonly clearTimer: (handle: unknown) => void;
  private pendingTimer: unknown = null;
  private suggestSeq = 0;
  private filesSeq = 0;

  constructor(options: ControllerOptions) {
    this.gateway = options.gateway;
    this.onChange = options.onChange;
    this.debounceMs = options.debounceMs ?? 250;
    this.setTimer = options.setTimer ?? ((fn, ms) => setTimeout(fn, ms));
    this.clearTimer = options.clearTimer ?? ((handle) => clearTimeout(handle as number));
  }

  getState(): UiState {
    return { ...this.state, suggestions: [...this.state.suggestions], fileIds: [...this.state.fileIds] };
  }

  onInput(text: string): void {
    this.suggestSeq += 1; // invalidates anything in flight
    this.cancelPending();
    this.state.input = text;
    if (text === "") {
      this.patch({ suggestions: [], selectedKeyword: null, fileIds: [], hint: null, status: "idle", errorMessage: null });
      return;
    }
    if (text.includes("#")) {
      this.patch({ suggestions: [], selectedKeyword: null, fileIds: [], hint: SEPARATOR_HINT, status: "idle", errorMessage: null });
      return;
    }
    this.patch({ hint: null, status: "loading", errorMessage: null });
    const seq = this.suggestSeq;
    this.pendingTimer = this.setTimer(() => {
      this.pendingTimer = null;
      void this.runSuggest(seq, text);
    }, this.debounceMs);
  }

  onSelect(keyword: string): void {
    if (!this.state.suggestions.includes(keyword)) {
      return; // selections must come from the currently rendered list
    }
    this.filesSeq += 1;
    const seq = this.filesSeq;
    this.patch({ selectedKeyword: keyword, fileIds: [], status: "loading", errorMessage: null });
    void this.gateway
      .filesFor(keyword)
      .then((ids) => {
        if (seq !== this.filesSeq) return;
        this.patch({ fileIds: ids, status: "idle" });
      })
      .catch((err) => {
        if (seq !== this.filesSeq) return;
        this.patch({ status: "error", errorMessage: String(err instanceof Error ? err.message : err) });
      });
  }

  private async runSuggest(seq: number, text: string): Promise<void> {
    try {
      const suggestions = await this.gateway.suggest(text);
      if (seq !== this.suggestSeq) return; // superseded while in flight
      const keepSelection =
        this.state.selectedKeyword !== null && suggestions.includes(this.state.selectedKeyword);
      this.patch({
        suggestions,
        status: "idle",
        selectedKeyword: keepSelection ? this.state.selectedKeyword : null,
        fileIds: keepSelection ? this.state.fileIds : [],
      });
    } catch (err) {
      if (seq !== this.suggestSeq) return;
      this.patch({ status: "error", errorMessage: String(err instanceof Error ? err.message : err) });
    }
  }

  private cancelPending(): void {
    if (this.pendingTimer !== null) {
      this.clearTimer(this.pendingTimer);
      this.pendingTimer = null;
    }
  }

  private patch(partial: Partial<UiState>): void {
    this.state = { ...this.state, ...partial };
    this.onChange(this.getState());
  }
}
