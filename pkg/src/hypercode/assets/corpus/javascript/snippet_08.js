function* zip(left, right) {
  const length = Math.min(left.length, right.length);
  for (let i = 0; i < length; i++) {
    yield [left[i], right[i]];
  }
}
