"""dB / dBm conversion helpers.

Convention used everywhere: x_linear = 10**(x_dB/10). Public configuration
carries dB/dBm values; all math downstream is linear.
"""

from __future__ import annotations


def db2lin(x_db: float) -> float:
    """dB value to linear ratio."""
    return 10.0 ** (x_db / 10.0)


def lin2db(x: float) -> float:
    """Linear ratio to dB. x must be > 0."""
    import math

    if x <= 0:
        raise ValueError("lin2db requires a positive argument")
    return 10.0 * math.log10(x)


def dbm2watt(p_dbm: float) -> float:
    """Absolute power, dBm to watts."""
    return 10.0 ** (p_dbm / 10.0) / 1000.0


def snr_linear(p_dbm: float, noise_dbm: float) -> float:
    """Mean SNR from transmit and noise powers, as a dB difference linearized."""
    return db2lin(p_dbm - noise_dbm)
