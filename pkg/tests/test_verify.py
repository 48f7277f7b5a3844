import pytest

from fracadi.verify import (
    CheckResult,
    check_factorization,
    check_operator_identities,
    check_weights_oracle,
    check_wsgd_order,
    format_results,
    run_checks,
)


def test_cheap_checks_pass():
    for result in (
        check_weights_oracle(kmax=300),
        check_wsgd_order(),
        check_operator_identities(count=12),
        check_factorization(count=8),
    ):
        assert result.passed, result.detail


def test_format_results():
    text = format_results([
        CheckResult("one", True, "ok"),
        CheckResult("two", False, "bad"),
    ])
    assert "[PASS] one: ok" in text
    assert "[FAIL] two: bad" in text


def test_unknown_level_rejected():
    with pytest.raises(ValueError, match="level"):
        run_checks("extreme")
