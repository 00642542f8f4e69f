"""Desk-scale constructive verification that the Apery numbers form a
Stieltjes moment sequence: exact positivity certificates for the Heun
coefficient streams, closed-form evaluation of the moment density, and
quadrature reproducing the integer moments."""

from apery_moments.exactnum import QSqrt2, PowerSeries, qsqrt2_sign

__all__ = ["QSqrt2", "PowerSeries", "qsqrt2_sign"]
__version__ = "0.1.0"
