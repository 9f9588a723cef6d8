"""Epidemic control under strategic misreporting: SVEAIR dynamics coupled to a signaling game."""

__version__ = "0.1.0"
