/**
 * Trailing-edge debounce: the wrapped function runs once, `wait` ms after the
 * last call, with the last call's arguments. Keeps keystrokes from turning
 * into request spam.
 */
export function debounce<T extends (...args: never[]) => void>(
  fn: T,
  wait = 300,
): (...args: Parameters<T>) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: Parameters<T>) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), wait);
  };
}
