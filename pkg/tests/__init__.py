"""
Tests for the boundary_ising package and its CLI
"""
