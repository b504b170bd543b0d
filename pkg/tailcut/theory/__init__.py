from tailcut.theory.checks import CHECKS, CheckAssertionError, CheckResult, run_check

__all__ = ["CHECKS", "CheckAssertionError", "CheckResult", "run_check"]
