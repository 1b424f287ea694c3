"""Desk-scale toolkit for compound wiretap channels.

Submodules:

- ``qcore``       exact states/operators on labeled Hilbert spaces
- ``channels``    channel kinds, conversions, diamond distance, tau-nets
- ``infotheory``  entropies, mutual information, Holevo quantity
- ``typicality``  typical sets and typical projectors with bound reports
- ``capacity``    fixed-block-length solvers for the capacity formulas
- ``wiretapsim``  random-coding simulation: codebooks, decoding, leakage
- ``entgen``      entanglement-generation protocol simulation
- ``cli``         command-line front end
"""

__version__ = "0.1.0"
