"""Shared fixtures and the acceptance-criterion summary hook."""

from __future__ import annotations

import sys

_CRITERIA: list[tuple[str, str, bool]] = []


def record_criterion(cid: str, description: str, passed: bool):
    """Log one acceptance criterion outcome for the terminal summary."""
    _CRITERIA.append((cid, description, passed))
    print(f"ACCEPTANCE {cid}: {'PASS' if passed else 'FAIL'} - {description}",
          file=sys.stderr)
    assert passed, f"acceptance criterion {cid} failed: {description}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid, description, passed in sorted(_CRITERIA):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"  {cid}: {status} - {description}")
