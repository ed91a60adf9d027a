"""Exception types shared across the simulator."""


class InvariantError(Exception):
    """A runtime invariant was violated; the simulation result cannot be trusted."""


class ConfigError(Exception):
    """Scenario configuration is invalid. The message names the key and line."""
