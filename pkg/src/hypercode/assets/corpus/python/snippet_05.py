USAGE = """usage: tool [options] FILE

Reads FILE and prints a short summary.
"""


def print_usage():
    print(USAGE.strip())
