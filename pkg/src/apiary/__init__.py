"""Honeybee colony energetics: demography, thermoregulation, floral quality
fields, foraging economics, the nectar/pollen exchange market, and a
daily-step colony simulator with a batch CLI."""

__version__ = "0.1.0"

from . import demography, flora, foraging, market, sim, thermo  # noqa: F401
