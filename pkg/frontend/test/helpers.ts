import { existsSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { expect } from "vitest";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", `${name}.json`), "utf-8")) as T;
}

/** Byte-exact golden comparison; the golden file is created on first run
 * and committed, so later runs must reproduce it exactly. */
export function matchGolden(name: string, content: string): void {
  const path = join(here, "golden", name);
  if (!existsSync(path)) {
    writeFileSync(path, content);
    return;
  }
  expect(content).toBe(readFileSync(path, "utf-8"));
}

export class MemoryStorage {
  private map = new Map<string, string>();
  getItem(key: string): string | null {
    return this.map.has(key) ? this.map.get(key)! : null;
  }
  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
  removeItem(key: string): void {
    this.map.delete(key);
  }
}
