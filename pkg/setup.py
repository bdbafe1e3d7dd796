"""Support legacy tools that still run setup.py directly."""

from setuptools import setup

setup()
