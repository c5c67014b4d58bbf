import pytest

from utils import identity_suite
from utils.errors import ConfigError, DomainError
from utils.identity_suite import CHECKS, run_identity_suite


@pytest.mark.parametrize("name", ["periodicity", "zero_set", "q_monotonicity", "cn_power_identity",
                                  "beta_oracle", "classical_reduction"])
def test_fast_checks_pass(name):
    result = CHECKS[name]()
    assert result["status"] == "pass", result["message"]


def test_suite_summary():
    results = run_identity_suite(["beta_oracle", "periodicity"])
    assert results["suite_status"] == "pass"
    assert results["passed"] == 2
    assert results["failed"] == 0


def test_unknown_check_is_rejected():
    with pytest.raises(ConfigError):
        run_identity_suite(["beta_oracle", "no_such_check"])


def test_raising_check_is_recorded_as_failure(monkeypatch):
    def broken():
        raise DomainError("broken check")

    monkeypatch.setitem(identity_suite.CHECKS, "beta_oracle", broken)
    results = run_identity_suite(["beta_oracle", "zero_set"])
    assert results["suite_status"] == "fail"
    assert results["checks"]["beta_oracle"]["status"] == "fail"
    assert "broken check" in results["checks"]["beta_oracle"]["message"]
    assert results["checks"]["zero_set"]["status"] == "pass"


@pytest.mark.slow
def test_full_suite_passes():
    results = run_identity_suite()
    failures = {name: r["message"] for name, r in results["checks"].items() if r["status"] != "pass"}
    assert not failures
