"""Preference inference from appliance-scheduling demonstrations in a
two-objective home energy environment."""

__version__ = "0.1.0"
