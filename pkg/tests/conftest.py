ACCEPTANCE_CRITERIA = {
    "test_payment_formula": "payment formula: exact anchors and +100/1000-word linearity",
    "test_slot_algebra": "slot algebra: size x quota minting and concurrent claim safety",
    "test_integrity_gates": "integrity gates: time lock, attestation, length, copy overlap",
    "test_distance_oracle": "distance oracle: hand enumeration and invariance suite",
    "test_statistics_oracle": "statistics oracle: brute-force agreement and golden report",
    "test_durability": "durability: kill-and-recover and snapshot equivalence",
    "test_end_to_end_simulation": "end to end: scripted crowd against a live service",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            if "test_acceptance.py" not in rep.nodeid:
                continue
            name = rep.nodeid.split("::")[-1]
            if name in ACCEPTANCE_CRITERIA:
                outcomes[name] = status.upper() if status != "passed" else "PASS"
                if status == "failed":
                    outcomes[name] = "FAIL"
    if not outcomes:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for name, label in ACCEPTANCE_CRITERIA.items():
        verdict = outcomes.get(name, "NOT RUN")
        terminalreporter.write_line(f"  [{verdict}] {label}")
