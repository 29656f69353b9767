function range(start, stop, step = 1) {
  const out = [];
  for (let value = start; value < stop; value += step) {
    out.push(value);
  }
  return out;
}

const squares = range(0, 10).map((n) => n * n);
