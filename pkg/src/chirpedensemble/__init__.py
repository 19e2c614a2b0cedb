# This file makes 'chirpedensemble' a Python package
