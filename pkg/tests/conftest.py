import itertools

import numpy as np
import pytest


def reference_encode(msg, generators=(0o15, 0o17), memory=3):
    """Independent encoder: polynomial products over GF(2) via np.convolve.

    Generator taps are read MSB first as coefficients of D^0..D^v.
    """
    msg = np.concatenate([np.asarray(msg, dtype=int), np.zeros(memory, dtype=int)])
    streams = []
    for g in generators:
        taps = [(g >> (memory - i)) & 1 for i in range(memory + 1)]
        streams.append(np.convolve(msg, taps)[: len(msg)] % 2)
    return np.stack(streams, axis=1).reshape(-1)


def all_messages(n):
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, with the measured detail."""
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                lines.append((props["criterion"], "PASS" if outcome == "passed" else "FAIL", props.get("detail", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for n, verdict, detail in sorted(lines):
            terminalreporter.write_line(f"criterion {n}: {verdict}  {detail}")
