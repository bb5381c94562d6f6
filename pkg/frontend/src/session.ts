/** Session state (selected architecture, pending modification stack, and
 * knobs) serialized to browser storage so a reload restores the
 * exact same view. The stack is replayable: each diff request sends the whole
 * stack against the original baseline, so server-side results never depend on
 * client-side incremental state.
 */

import type { DiffResponse, ModSpec } from "./types.js";

export interface ClusterParams {
  workers: number[];
  bandwidth: string;
  topology: string;
}

export interface SessionState {
  architecture: string;
  batch: number;
  stack: ModSpec[];
  cluster: ClusterParams;
  lastDiff: DiffResponse | null;
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const KEY = "archlens-explorer-session";

export function defaultSession(): SessionState {
  return {
    architecture: "nin",
    batch: 1024,
    stack: [],
    cluster: { workers: [1, 2, 4, 8, 16, 32, 64, 128], bandwidth: "1GB/s", topology: "tree:2" },
    lastDiff: null,
  };
}

export function saveSession(storage: StorageLike, state: SessionState): void {
  storage.setItem(KEY, JSON.stringify(state));
}

export function loadSession(storage: StorageLike): SessionState {
  const raw = storage.getItem(KEY);
  if (raw === null) return defaultSession();
  try {
    const parsed = JSON.parse(raw) as Partial<SessionState>;
    const base = defaultSession();
    return {
      architecture: typeof parsed.architecture === "string" ? parsed.architecture : base.architecture,
      batch: typeof parsed.batch === "number" && parsed.batch >= 1 ? parsed.batch : base.batch,
      stack: Array.isArray(parsed.stack) ? (parsed.stack as ModSpec[]) : [],
      cluster: parsed.cluster && Array.isArray(parsed.cluster.workers)
        ? (parsed.cluster as ClusterParams)
        : base.cluster,
      lastDiff: parsed.lastDiff ?? null,
    };
  } catch {
    return defaultSession();
  }
}

export function clearSession(storage: StorageLike): void {
  storage.removeItem(KEY);
}

export function pushEdit(state: SessionState, mod: ModSpec): SessionState {
  return { ...state, stack: [...state.stack, mod] };
}

export function popEdit(state: SessionState): SessionState {
  return { ...state, stack: state.stack.slice(0, -1), lastDiff: null };
}

/** The replayable request body: the full stack against the original baseline. */
export function diffRequest(state: SessionState): {
  baseline: string;
  batch: number;
  mods: ModSpec[];
} {
  return { baseline: state.architecture, batch: state.batch, mods: [...state.stack] };
}
