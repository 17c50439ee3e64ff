"""Building energy management agent runtime.

A simulated smart home (meters, devices, schedules, long-term memory),
deterministic energy/cost analytics, an LLM-agent run loop over a
pluggable provider, and a 120-query scoring benchmark.
"""

__version__ = "0.1.0"
