"""Config, console, errors, run engine and report emission."""
