function histogram(words) {
  return words.reduce((acc, word) => {
    acc[word] = (acc[word] || 0) + 1;
    return acc;
  }, {});
}

const top = (h) =>
  Object.entries(h)
    .sort((a, b) => b[1] - a[1])
    .slice(0, 5);
