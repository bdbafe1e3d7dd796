"""Dummy file needed for pylint to discover unit tests."""
