"""
Test package for gridchange.
"""
