function chunk(array, size) {
  if (size <= 0) {
    throw new RangeError("size must be positive");
  }
  const chunks = [];
  for (let i = 0; i < array.length; i += size) {
    chunks.push(array.slice(i, i + size));
  }
  return chunks;
}
