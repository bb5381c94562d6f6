/** Trailing-edge debounce with injectable timers, so edit storms produce at
 * most one in-flight diff request. */

export interface TimerHost {
  setTimeout(fn: () => void, ms: number): number;
  clearTimeout(id: number): void;
}

const realTimers: TimerHost = {
  setTimeout: (fn, ms) => setTimeout(fn, ms) as unknown as number,
  clearTimeout: (id) => clearTimeout(id),
};

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  ms: number,
  timers: TimerHost = realTimers,
): (...args: A) => void {
  let pending: number | null = null;
  return (...args: A) => {
    if (pending !== null) timers.clearTimeout(pending);
    pending = timers.setTimeout(() => {
      pending = null;
      fn(...args);
    }, ms);
  };
}
