"""Collects one verdict per acceptance criterion for the terminal summary."""
RESULTS = {}


def record(key, ok, detail):
    RESULTS[key] = (bool(ok), detail)
    print(f"{key} {'PASS' if ok else 'FAIL'}: {detail}")
    return bool(ok)
