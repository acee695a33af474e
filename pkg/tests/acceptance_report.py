"""Collects one PASS/FAIL line per acceptance criterion."""

RESULTS: dict[int, str] = {}


def report(number: int, ok: bool, text: str) -> bool:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {text}"
    RESULTS[number] = line
    print(line)
    return ok
