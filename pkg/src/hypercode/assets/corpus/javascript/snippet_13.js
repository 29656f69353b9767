const pipeline =
  (...fns) =>
  (input) =>
    fns.reduce((value, fn) => fn(value), input);

const normalize = pipeline(
  (s) => s.trim(),
  (s) => s.toLowerCase(),
);
