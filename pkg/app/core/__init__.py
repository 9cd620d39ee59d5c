"""
Core modules: lifetime laws, equilibrium ladders, unit-interval transforms,
shape deciders, orderings and report plumbing.
"""
