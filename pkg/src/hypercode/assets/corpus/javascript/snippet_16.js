function flattenDeep(value) {
  if (!Array.isArray(value)) {
    return [value];
  }
  return value.flatMap(flattenDeep);
}
