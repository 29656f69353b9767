function parseQueryString(query) {
  const params = {};
  const trimmed = query.startsWith("?") ? query.slice(1) : query;
  for (const pair of trimmed.split("&")) {
    if (!pair) continue;
    const [key, value = ""] = pair.split("=");
    params[decodeURIComponent(key)] = decodeURIComponent(value);
  }
  return params;
}
