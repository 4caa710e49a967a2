"""Time double-slit interference in tunnelling ionization of hydrogen."""

__version__ = "0.1.0"
