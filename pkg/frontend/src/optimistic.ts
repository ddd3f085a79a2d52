/** Optimistic mutation helper: apply locally, sync remotely, revert on
 * failure. The snapshot returned by apply() is whatever revert needs. */

export interface OptimisticOptions<T> {
  apply: () => T;
  remote: () => Promise<void>;
  revert: (snapshot: T) => void;
  onError?: (error: Error) => void;
  onSettled?: () => void;
}

let pending = 0;

export function optimistic<T>(options: OptimisticOptions<T>): Promise<void> {
  const snapshot = options.apply();
  pending += 1;
  return options
    .remote()
    .catch((error: Error) => {
      options.revert(snapshot);
      options.onError?.(error);
    })
    .finally(() => {
      pending -= 1;
      options.onSettled?.();
    });
}

export function hasPendingMutations(): boolean {
  return pending > 0;
}
