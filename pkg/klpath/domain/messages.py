"""centralized diagnostic messages"""
from typing import Any, Dict


class Messages:
    """one-line diagnostics shown by the cli, keyed by category and key"""

    # ============================================================================
    # modulus and residue messages
    # ============================================================================
    MODULUS: Dict[str, str] = {
        "not_prime": "p = {p} is not a prime; the modulus must be a power of an odd prime",
        "even_prime": "p = 2 is excluded; the modulus must be a power of an odd prime",
        "bad_exponent": "n = {n} is invalid; the exponent must satisfy n >= 1",
        "too_large": "p^n = {p}^{n} does not fit in 64 bits",
        "not_unit": "{value} is not a unit modulo {q} (divisible by {p})",
        "table_limit": "q = {q} exceeds the tabulation limit {limit} for direct summation",
    }

    # ============================================================================
    # argument range messages
    # ============================================================================
    DOMAIN: Dict[str, str] = {
        "t_range": "time {t} lies outside [0, 1]",
        "t_zero": "the step approximation is undefined at t = 0 (half-open blocks)",
        "order": "expected s < t, got s = {s}, t = {t}",
        "odd_alpha": "alpha = {alpha} must be a positive even integer",
        "prefix": "prefix index {j} is not coprime to p or lies outside [1, {q}]",
        "index": "index j = {j} lies outside [1, {phi}]",
        "truncation": "truncation H = {H} must equal (q - 1)/2 = {expected}",
        "positive": "{name} must be positive, got {value}",
        "nonnegative": "{name} must be nonnegative, got {value}",
        "empty_grid": "the {name} grid is empty",
        "gap_grid": "gap {gap} lies outside (0, 1]",
        "too_many_units": "q = {q} exceeds the exact-averaging limit {limit}; refusing to subsample",
    }

    # ============================================================================
    # hypothesis messages
    # ============================================================================
    HYPOTHESIS: Dict[str, str] = {
        "factor4": "the factor-4 bound requires n >= 31, got n = {n}",
        "delta_window": "the interval bound requires n >= 31 (empty delta window), got n = {n}",
        "delta_range": "delta = {delta} must satisfy 0 < delta <= min(gamma2 n/16, n/2 - 15) = {delta_max}",
        "alpha_range": "alpha = {alpha} must be an even integer > max(n/delta, (n/2 + delta)/delta) = {threshold}",
        "beta_positive": "beta = {beta} is not positive",
        "interval_length": "interval length N = {N} is below p^(n/2 - delta)",
    }

    # ============================================================================
    # consistency and io messages
    # ============================================================================
    CHECK: Dict[str, str] = {
        "not_real": "accumulated imaginary part {imag} exceeds {tol} for a = {a}, b = {b}",
        "plancherel": "coefficient sum {coeff} and 4|I|/q = {plancherel} disagree",
    }

    IO: Dict[str, str] = {
        "empty": "input file {path} holds no data rows",
        "header": "input file {path} has header {header}, expected {expected}",
        "unknown": "cannot recognise {path} as a path csv or a report json",
        "missing": "input file {path} does not exist",
        "config_file": "config file {path} could not be read",
        "config_value": "invalid configuration: {detail}",
        "log_level": "unknown log level {level}, expected DEBUG, INFO, WARNING, ERROR or CRITICAL",
    }

    @staticmethod
    def get(category: str, key: str, **kwargs: Any) -> str:
        """
        get a diagnostic message by category and key

        args:
            category: message category (modulus, domain, hypothesis, check, io)
            key: message key within category
            **kwargs: format arguments for string interpolation

        returns:
            message string, formatted with kwargs if provided
        """
        category_dict = getattr(Messages, category.upper(), {})
        text = category_dict.get(key, key)

        if kwargs:
            try:
                return text.format(**kwargs)
            except (KeyError, IndexError, ValueError):
                return text

        return text
