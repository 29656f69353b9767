import json


def load_config(path):
    # Missing files fall back to an empty config.
    try:
        with open(path) as handle:
            return json.load(handle)
    except FileNotFoundError:
        return {}
