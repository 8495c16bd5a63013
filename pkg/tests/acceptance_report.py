"""Collects one result line per acceptance criterion."""
LINES = []


def record(number, name, passed, detail=""):
    line = f"[criterion {number}] {'PASS' if passed else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
    LINES.append(line)
    print(line)
    return passed
