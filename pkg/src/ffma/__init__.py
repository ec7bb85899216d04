"""Finite-field multiple access: element-pair codes, multiplexing, coding and detection."""

from . import butterfly, channel_code, encoder, epcode, gf, modem, receiver

__version__ = "0.1.0"

__all__ = ["butterfly", "channel_code", "encoder", "epcode", "gf", "modem", "receiver"]
