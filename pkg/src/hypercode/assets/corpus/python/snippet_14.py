import re

CAMEL_BOUNDARY = re.compile(r"(?<=[a-z])(?=[A-Z])")


def to_snake_case(name):
    return CAMEL_BOUNDARY.sub("_", name).lower()
