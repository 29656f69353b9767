def parse_key_values(lines):
    table = {}
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        table[key.strip()] = value.strip()
    return table
