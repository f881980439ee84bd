"""Package for API integration tests."""
