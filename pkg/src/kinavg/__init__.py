"""Numerical verification toolkit for kinetic velocity-averaging estimates."""
