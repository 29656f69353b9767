const counters = new WeakMap();

function countCalls(target) {
  const current = counters.get(target) ?? 0;
  counters.set(target, current + 1);
  return current + 1;
}
