"""Unit conversions used at configuration and reporting boundaries.

Everything inside the library is SI (watts, Hz, radians, seconds); dBm,
dB and degrees appear only when reading configs or writing reports.
"""

import numpy as np


def db_to_linear(db):
    """Power ratio from dB."""
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(lin):
    """dB from a (strictly positive) linear power ratio."""
    return 10.0 * np.log10(lin)


def dbm_to_watts(dbm):
    """Transmit power in watts from dBm."""
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(watts):
    """dBm from watts."""
    return 10.0 * np.log10(watts) + 30.0


def deg_to_rad(deg):
    return np.deg2rad(deg)


def rad_to_deg(rad):
    return np.rad2deg(rad)
