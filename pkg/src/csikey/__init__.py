"""Physical-layer cryptosystem built on a massive-MIMO wiretap channel.

Subpackages cover the linear-algebra core, Gaussian distributions on
lattices, the wiretap channel itself, parameter constraint tables,
eavesdropper attacks and reduction machinery, and the two protocols
(key agreement, symmetric cipher).
"""

__version__ = "0.1.0"
