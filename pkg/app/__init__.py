"""
Ageing-orderings toolkit: equilibrium ladders of lifetime laws and the
generalized ageing orderings and classes defined on them.
"""

__version__ = "1.0.0"
