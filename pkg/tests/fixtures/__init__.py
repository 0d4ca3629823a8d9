"""
Test Fixtures

This module provides reusable test data including:
- A small LIBSVM file (sample.libsvm) with a never-used feature column
- A malformed LIBSVM file for parser error tests
- A partial configuration override (config/test_config.json)

Fixtures are used across multiple test files to ensure consistency.
"""
