"""
Test Suite for sparse_iscra

This package contains tests for all components of the library and CLI:
- Unit tests: kernels, solvers, diagnostics, data I/O and utilities in isolation
- Integration tests: CLI subcommands and the acceptance checks end to end
- Fixtures: Small LIBSVM files and configuration overrides
- Mocks: Fault-injection doubles for numerical kernels

Test Organization:
- tests/unit/: Unit tests for individual modules
- tests/integration/: End-to-end CLI and acceptance tests
- tests/fixtures/: Data files used by several tests
- tests/mocks/: Replacement kernels for fault injection

Running Tests:
    # Run all fast tests
    pytest tests/

    # Run specific test suite
    pytest tests/unit/
    pytest tests/integration/

    # Include slow synthetic tests
    pytest --runslow tests/

    # Run with coverage
    pytest --cov=sparse_iscra tests/
"""

__version__ = "1.0.0"
