"""Randomized broadcasting in blind radio networks."""
