"""
Tests package for the ageing-orderings toolkit.
"""
