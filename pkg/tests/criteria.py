"""Registry of acceptance results, printed by the terminal summary hook."""

RESULTS = {}


def record_criterion(number, passed, detail):
    RESULTS[str(number)] = (passed, detail)
